"""Complex-valued consensus estimator over edge agents.

Each edge agent ``k`` carries an estimate ``z_k`` of ``exp(i*theta_k)``, where
``theta_k`` is the bearing angle of its edge, and follows

    dz_k/dt = sum_{j in N_k} (exp(-i*theta_jk) * z_j - z_k)

i.e. ``dz/dt = H z``.  Estimates are not projected back onto the unit circle;
angles are read off by argument only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .errors import NumericalError, PreconditionError
from .geometry import principal_value
from .locgraph import LocalizationInteractionGraph

CONVERGENCE_DELTA = 1e-12
CONVERGENCE_WINDOW = 100


def build_h_matrix(lig: LocalizationInteractionGraph) -> np.ndarray:
    m = len(lig)
    h = np.zeros((m, m), dtype=complex)
    for (k, j), theta in lig.weights.items():
        h[k - 1, j - 1] = np.exp(-1j * theta)
        h[k - 1, k - 1] -= 1.0
    return h


def anchor(lig: LocalizationInteractionGraph, l: int) -> LocalizationInteractionGraph:
    """Freeze agent ``l``: drop its outgoing interaction edges so it never updates."""
    lig.agent(l)
    kept = {kj: theta for kj, theta in lig.weights.items() if kj[0] != l}
    anchored = tuple(sorted(set(lig.anchored) | {l}))
    return LocalizationInteractionGraph(lig.agents, kept, anchored)


@dataclass(frozen=True)
class EstimatorConfig:
    dt: float = 0.01
    t_final: float = 30.0
    seed: int = 0
    anchor: int | None = None
    anchor_angle: float | None = None
    init_mode: Literal["random", "given"] = "random"
    initial: Sequence[complex] | None = None
    early_stop: bool = False

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise PreconditionError(f"dt must be positive, got {self.dt}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise PreconditionError(f"t_final must be non-negative, got {self.t_final}")
        if (self.anchor is None) != (self.anchor_angle is None):
            raise PreconditionError("anchor and anchor_angle must be given together")
        if self.init_mode not in ("random", "given"):
            raise PreconditionError(f"unknown init_mode {self.init_mode!r}")
        if self.init_mode == "given" and self.initial is None:
            raise PreconditionError("init_mode 'given' needs initial estimates")


@dataclass(frozen=True)
class EstimatorState:
    estimates: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution; ``states[i]`` holds all estimates at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    converged_at: float | None = field(default=None)

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> EstimatorState:
        return EstimatorState(self.states[i], float(self.times[i]))

    @property
    def final(self) -> EstimatorState:
        return self[-1]


def initial_estimates(m: int, cfg: EstimatorConfig) -> EstimatorState:
    """Seeded uniform draw on the unit circle, or the given vector; anchor pinned to its angle."""
    if cfg.init_mode == "given":
        z0 = np.asarray(cfg.initial, dtype=complex).copy()
        if z0.shape != (m,):
            raise PreconditionError(f"initial estimates must have length {m}")
    else:
        rng = np.random.default_rng(cfg.seed)
        z0 = np.exp(1j * rng.uniform(-np.pi, np.pi, size=m))
    if cfg.anchor is not None:
        if not 1 <= cfg.anchor <= m:
            raise PreconditionError(f"unknown anchor agent {cfg.anchor}")
        z0[cfg.anchor - 1] = np.exp(1j * cfg.anchor_angle)
    return EstimatorState(z0, 0.0)


def _rk4_step(h: np.ndarray, z: np.ndarray, dt: float) -> np.ndarray:
    k1 = h @ z
    k2 = h @ (z + 0.5 * dt * k1)
    k3 = h @ (z + 0.5 * dt * k2)
    k4 = h @ (z + dt * k3)
    return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    h: np.ndarray,
    z0: EstimatorState,
    cfg: EstimatorConfig,
    theta_true: Sequence[float] | None = None,
) -> Trajectory:
    """Classical fixed-step RK4 for ``dz/dt = H z`` from ``z0.time`` over ``cfg.t_final``.

    With ``cfg.early_stop`` and ``theta_true`` the run ends once the error spread
    has moved by less than 1e-12 for 100 consecutive steps.
    """
    h = np.asarray(h, dtype=complex)
    z = np.asarray(z0.estimates, dtype=complex).copy()
    m = len(z)
    if h.shape != (m, m):
        raise PreconditionError(f"H is {h.shape}, state has length {m}")
    if cfg.anchor is not None and np.any(h[cfg.anchor - 1] != 0):
        raise PreconditionError(f"anchored agent {cfg.anchor} still has a non-zero row in H")

    n_steps = int(math.floor(cfg.t_final / cfg.dt + 1e-9))
    step_sizes = [cfg.dt] * n_steps
    tail = cfg.t_final - n_steps * cfg.dt
    if tail > 1e-12 * max(1.0, cfg.t_final):
        step_sizes.append(tail)

    watch = cfg.early_stop and theta_true is not None
    truth = np.asarray(theta_true, dtype=float) if watch else None
    times = [z0.time]
    states = [z.copy()]
    t = z0.time
    last_spread = error_metrics(orientation_estimates(z), truth).spread if watch else 0.0
    calm = 0
    converged_at = None
    for i, step in enumerate(step_sizes):
        with np.errstate(over="ignore", invalid="ignore"):
            z = _rk4_step(h, z, step)
        if not np.all(np.isfinite(z)):
            raise NumericalError(f"non-finite estimate at step {i + 1}")
        t = z0.time + (i + 1) * cfg.dt if step == cfg.dt else z0.time + cfg.t_final
        times.append(t)
        states.append(z.copy())
        if watch:
            spread = error_metrics(orientation_estimates(z), truth).spread
            calm = calm + 1 if abs(spread - last_spread) < CONVERGENCE_DELTA else 0
            last_spread = spread
            if calm >= CONVERGENCE_WINDOW:
                converged_at = t
                break
    return Trajectory(np.array(times), np.array(states), converged_at)


def orientation_estimates(state: EstimatorState | np.ndarray) -> np.ndarray:
    """Principal argument of every estimate."""
    z = state.estimates if isinstance(state, EstimatorState) else np.asarray(state, dtype=complex)
    zero = np.flatnonzero(z == 0)
    if zero.size:
        raise NumericalError(f"estimates of agents {[int(k) + 1 for k in zero]} are zero; angle undefined")
    return np.array([principal_value(a) for a in np.angle(z)])


@dataclass(frozen=True)
class ErrorMetrics:
    per_agent_error: np.ndarray
    spread: float
    bias: float


def error_metrics(theta_hat: Sequence[float], theta_true: Sequence[float]) -> ErrorMetrics:
    """Per-agent wrapped errors, their circular mean (bias) and max deviation from it (spread)."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_true = np.asarray(theta_true, dtype=float)
    if theta_hat.shape != theta_true.shape:
        raise PreconditionError("estimate and truth lengths differ")
    errors = np.array([principal_value(a) for a in theta_hat - theta_true])
    if errors.size == 0:
        return ErrorMetrics(errors, 0.0, 0.0)
    bias = principal_value(float(np.angle(np.exp(1j * errors).sum())))
    spread = max(abs(principal_value(e - bias)) for e in errors)
    return ErrorMetrics(errors, float(spread), bias)


def spread_history(traj: Trajectory, theta_true: Sequence[float]) -> np.ndarray:
    return np.array([error_metrics(orientation_estimates(z), theta_true).spread for z in traj.states])


def decay_rate(times: np.ndarray, values: np.ndarray, t_min: float = 1.0, floor: float = 1e-11) -> float:
    """Slope of a least-squares fit of ``log(values)`` against time.

    Samples before ``t_min`` (transient) or at/below ``floor`` (round-off) are skipped.
    """
    times = np.asarray(times)
    values = np.asarray(values)
    mask = (times >= t_min) & (values > floor)
    if mask.sum() < 2:
        raise PreconditionError("not enough samples above the floor to fit a decay rate")
    slope, _ = np.polyfit(times[mask], np.log(values[mask]), 1)
    return float(slope)


def simulate(
    lig: LocalizationInteractionGraph,
    cfg: EstimatorConfig,
    theta_true: Sequence[float] | None = None,
) -> Trajectory:
    """Anchor (if configured), build H, draw initial estimates and integrate."""
    if cfg.anchor is not None:
        lig = anchor(lig, cfg.anchor)
    h = build_h_matrix(lig)
    z0 = initial_estimates(len(lig), cfg)
    return integrate(h, z0, cfg, theta_true)


def anchored_config(cfg: EstimatorConfig, lig: LocalizationInteractionGraph, u: str, v: str, angle: float) -> EstimatorConfig:
    return replace(cfg, anchor=lig.agent_for_edge(u, v), anchor_angle=angle)
