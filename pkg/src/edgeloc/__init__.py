"""Bearing localization of a sensor network from subtended-angle measurements.

Modules:

* ``geometry``: positions, bearings, angle measurement sets, scenario files.
* ``graphs``: directed graphs, line graphs, spanning-tree roots and counts.
* ``locgraph``: communication, edge localization and interaction graphs.
* ``estimator``: the complex consensus estimator and its error metrics.
* ``analysis``: rank, null vectors and convergence predictions.
* ``cli``: the ``edgeloc`` command.
"""

from .analysis import predict_convergence
from .estimator import EstimatorConfig, simulate
from .geometry import AngleMeasurementSet, Position, Scenario, load_scenario
from .locgraph import localize

__all__ = [
    "AngleMeasurementSet",
    "EstimatorConfig",
    "Position",
    "Scenario",
    "load_scenario",
    "localize",
    "predict_convergence",
    "simulate",
]
