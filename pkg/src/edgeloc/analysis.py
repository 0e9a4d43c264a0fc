"""Structural checks on H and convergence predictions.

The only numerical knob here is ``RANK_TOL``: pivots smaller than this
fraction of the largest entry modulus of the input count as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import PreconditionError
from .geometry import Scenario
from .graphs import sink_components
from .locgraph import Localization, localize

RANK_TOL = 1e-9
UNIT_TOL = 1e-9

Verdict = Literal["no-global-consensus", "biased-consensus", "exact-recovery"]


@dataclass(frozen=True)
class SimilarityReport:
    max_deviation: float


def similarity_check(h: np.ndarray, z_true: Sequence[complex]) -> SimilarityReport:
    """Compare ``D_z^-1 H D_z`` with the negated unit Laplacian of H's sparsity pattern."""
    h = np.asarray(h, dtype=complex)
    z = np.asarray(z_true, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) > UNIT_TOL):
        raise PreconditionError("similarity check needs unit-modulus z")
    h_bar = h * z[np.newaxis, :] / z[:, np.newaxis]
    off = ~np.eye(len(z), dtype=bool) & (h != 0)
    target = np.where(off, 1.0, 0.0).astype(complex)
    np.fill_diagonal(target, -off.sum(axis=1))
    return SimilarityReport(float(np.abs(h_bar - target).max(initial=0.0)))


def _row_echelon(a: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form by Gauss-Jordan with partial pivoting; returns (R, pivot columns)."""
    r = np.array(a, dtype=complex)
    rows, cols = r.shape
    scale = np.abs(r).max(initial=0.0)
    threshold = tol * scale
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        p = row + int(np.argmax(np.abs(r[row:, col])))
        if np.abs(r[p, col]) <= threshold:
            r[row:, col] = 0.0
            continue
        r[[row, p]] = r[[p, row]]
        r[row] /= r[row, col]
        for i in range(rows):
            if i != row and r[i, col] != 0:
                r[i] -= r[i, col] * r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def matrix_rank(a: np.ndarray, tol: float = RANK_TOL) -> int:
    return len(_row_echelon(np.atleast_2d(a), tol)[1])


def nullity(h: np.ndarray) -> int:
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    return h.shape[1] - matrix_rank(h)


def left_null_vector(h: np.ndarray) -> np.ndarray:
    """Unit vector ``w`` with ``w^T H = 0``; requires a one-dimensional left null space.

    Normalised so the first non-negligible component is real and positive.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    m = h.shape[0]
    r, pivots = _row_echelon(h.T)
    free = [c for c in range(m) if c not in pivots]
    if len(free) != 1:
        raise PreconditionError(f"left null space has dimension {len(free)}, expected 1")
    f = free[0]
    w = np.zeros(m, dtype=complex)
    w[f] = 1.0
    for i, c in enumerate(pivots):
        w[c] = -r[i, f]
    w /= np.linalg.norm(w)
    lead = w[np.flatnonzero(np.abs(w) > RANK_TOL)[0]]
    return w * (abs(lead) / lead)


def is_degenerate_initial(z0: Sequence[complex], h: np.ndarray) -> bool:
    """True iff ``z0`` lies in the column space of H, i.e. the estimate decays to zero."""
    z0 = np.asarray(getattr(z0, "estimates", z0), dtype=complex)
    w = left_null_vector(h)
    return bool(abs(w @ z0) < 1e-9 * np.linalg.norm(z0))


@dataclass(frozen=True)
class ConvergencePrediction:
    verdict: Verdict
    witness: str


def predict_convergence(
    scenario: Scenario | Localization,
    anchored: tuple[str, str] | None = None,
    *,
    closure: bool = True,
) -> ConvergencePrediction:
    """Structural verdict from the edge localization graph's oriented spanning tree."""
    loc = scenario if isinstance(scenario, Localization) else localize(scenario, closure)
    roots = loc.elg_roots
    if not roots:
        n_sinks = len(sink_components(loc.elg.graph))
        return ConvergencePrediction(
            "no-global-consensus",
            f"edge localization graph has {n_sinks} sink components and no oriented spanning tree",
        )
    order = loc.elg.graph.index
    if anchored is not None:
        u, v = anchored
        loc.lig.agent_for_edge(u, v)
        tail = loc.lig.agent(loc.lig.agent_for_edge(u, v)).node.tail
        if tail in roots:
            return ConvergencePrediction("exact-recovery", str(tail))
    return ConvergencePrediction("biased-consensus", str(min(roots, key=order.__getitem__)))


def classify_outcome(
    errors: Sequence[float], spread: float, tol: float = 1e-6
) -> Verdict:
    """Empirical counterpart of :func:`predict_convergence` from final errors."""
    if np.max(np.abs(errors), initial=0.0) < tol:
        return "exact-recovery"
    if spread < tol:
        return "biased-consensus"
    return "no-global-consensus"


CONVERGING_SLOPE = -0.01
SETTLED = 1e-9


def _settles(times: np.ndarray, values: np.ndarray) -> bool:
    """Already negligible at the end, or shrinking exponentially over the second half."""
    from .estimator import decay_rate

    if values[-1] < SETTLED:
        return True
    late = times >= times[0] + 0.5 * (times[-1] - times[0])
    try:
        return decay_rate(times[late], values[late], t_min=-np.inf) < CONVERGING_SLOPE
    except PreconditionError:
        return False


def observed_verdict(traj, theta_true: Sequence[float]) -> Verdict:
    """Empirical verdict from how the errors evolve, not from a fixed threshold at one time.

    Exact recovery when the largest absolute error settles, biased consensus when
    only the spread about the common bias settles.
    """
    from .estimator import error_metrics, orientation_estimates

    times = np.asarray(traj.times, dtype=float)
    if len(times) < 3:
        raise PreconditionError("trajectory too short to classify")
    spreads, worst = [], []
    for z in traj.states:
        m = error_metrics(orientation_estimates(z), theta_true)
        spreads.append(m.spread)
        worst.append(float(np.abs(m.per_agent_error).max(initial=0.0)))
    if _settles(times, np.array(worst)):
        return "exact-recovery"
    if _settles(times, np.array(spreads)):
        return "biased-consensus"
    return "no-global-consensus"
