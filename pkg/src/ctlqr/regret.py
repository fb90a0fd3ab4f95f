"""Regret accounting against the oracle-optimal feedback, and the
quadratic/cross-term decomposition diagnostic.

Regret at horizon T is the integrated cost gap between the adaptive
closed loop and the optimal one. By default both systems are driven by
the same Brownian increments ("coupled" mode): that leaves the expected
regret unchanged while removing most of the common noise variance, so a
single path is already informative. Both modes are available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GridMismatchError
from .linalg import Gain, matrix_exponential, optimal_gain, solve_care, spectral_abscissa
from .model import CostSpec, Dynamics
from .noise import NoisePath
from .sde import EstimatorAccumulators, Trajectory, simulate_segment

__all__ = [
    "RegretCurve",
    "RegretDecomposition",
    "instantaneous_cost",
    "compute_regret",
    "oracle_run",
    "decomposition_check",
    "TransientWeightCache",
]


@dataclass(frozen=True)
class RegretCurve:
    """Regret evaluated at checkpoint times, with its sqrt-normalization.

    normalized is regret / sqrt(times), entry for entry.
    """

    times: np.ndarray
    regret: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        regret = np.asarray(self.regret, dtype=float)
        normalized = np.asarray(self.normalized, dtype=float)
        if not (times.shape == regret.shape == normalized.shape) or times.ndim != 1:
            raise DimensionError("times, regret, normalized must be 1-D of equal length")
        if times.size and times.min() <= 0.0:
            raise DimensionError("checkpoint times must be positive")
        if not np.array_equal(normalized, regret / np.sqrt(times)):
            raise DimensionError("normalized must equal regret / sqrt(times)")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "regret", regret)
        object.__setattr__(self, "normalized", normalized)

    @classmethod
    def from_regret(cls, times, regret) -> "RegretCurve":
        times = np.asarray(times, dtype=float)
        regret = np.asarray(regret, dtype=float)
        if times.size and times.min() <= 0.0:
            raise DimensionError("checkpoint times must be positive")
        return cls(times=times, regret=regret, normalized=regret / np.sqrt(times))


@dataclass(frozen=True)
class RegretDecomposition:
    """Split of the regret proxy into its quadratic and cross terms.

    quadratic_term = int ||(K_t - K*) x_t||^2 dt  (always >= 0)
    cross_term     = int 2 x_t^T E_{T-t} (K_t - K*) x_t dt
    L_T            = quadratic_term - cross_term
    """

    quadratic_term: float
    cross_term: float
    L_T: float

    def __post_init__(self):
        if not np.isfinite(self.L_T) or not np.isfinite(self.quadratic_term):
            raise DimensionError("decomposition terms must be finite")
        if self.quadratic_term < 0.0:
            raise DimensionError("quadratic_term must be >= 0")


def instantaneous_cost(x, u, cost: CostSpec) -> float:
    """x^T Q x + u^T R u."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (cost.Q.shape[0],):
        raise DimensionError(f"x must have shape ({cost.Q.shape[0]},), got {x.shape}")
    if u.shape != (cost.R.shape[0],):
        raise DimensionError(f"u must have shape ({cost.R.shape[0]},), got {u.shape}")
    return float(x @ cost.Q @ x + u @ cost.R @ u)


def _cumulative_cost(traj: Trajectory, cost: CostSpec) -> np.ndarray:
    """Left-endpoint quadrature of the running cost, recomputed from states/inputs."""
    n = traj.n_steps
    if n == 0:
        return np.zeros(traj.times.shape[0])
    X = traj.states[:n]
    U = traj.inputs[:n]
    c = np.einsum("ki,ij,kj->k", X, cost.Q, X) + np.einsum("ki,ij,kj->k", U, cost.R, U)
    return np.concatenate([[0.0], np.cumsum(c) * traj.dt])


def compute_regret(
    adaptive: Trajectory, oracle: Trajectory, cost: CostSpec, checkpoints
) -> RegretCurve:
    """Cost gap int (c_adaptive - c_oracle) over [0, T] at each checkpoint.

    Both trajectories must share the time grid exactly; checkpoints must
    lie on it (within half a step).
    """
    if adaptive.times.shape != oracle.times.shape or not np.array_equal(
        adaptive.times, oracle.times
    ):
        raise GridMismatchError("adaptive and oracle trajectories do not share a time grid")
    if adaptive.n_steps == 0:
        raise GridMismatchError("trajectories have no steps")
    dt = adaptive.dt
    t0 = adaptive.times[0]
    cum_a = _cumulative_cost(adaptive, cost)
    cum_o = _cumulative_cost(oracle, cost)

    checkpoints = np.atleast_1d(np.asarray(checkpoints, dtype=float))
    regret = np.empty(checkpoints.shape[0])
    for i, T in enumerate(checkpoints):
        if T <= 0.0:
            raise DimensionError(f"checkpoint times must be positive, got {T}")
        idx = int(round((T - t0) / dt))
        if not (0 <= idx < cum_a.shape[0]) or abs(adaptive.times[idx] - T) > 0.5 * dt * (1 + 1e-9):
            raise GridMismatchError(f"checkpoint T={T} is not on the trajectory grid")
        regret[i] = cum_a[idx] - cum_o[idx]
    return RegretCurve.from_regret(checkpoints, regret)


def oracle_run(
    dyn: Dynamics,
    cost: CostSpec,
    x0,
    horizon: float,
    dt: float,
    noise: NoisePath,
    backend: str | None = None,
) -> Trajectory:
    """Simulate the optimal closed loop u = K* x on the given noise path."""
    k_star = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R)
    traj, _, _ = simulate_segment(
        dyn,
        cost,
        k_star,
        x0,
        horizon,
        dt,
        noise,
        EstimatorAccumulators.zero(dyn.p, dyn.q),
        update_accumulators=False,
        backend=backend,
    )
    return traj


class TransientWeightCache:
    """e^{D*^T t} P* e^{D* t} B* on a geometric grid with linear interpolation.

    D* = A + B K* is Hurwitz, so the weight decays exponentially; the grid
    runs from 0 out to the time where its spectral norm falls below
    `cutoff`, after which the weight is treated as zero.
    """

    def __init__(self, dyn: Dynamics, cost: CostSpec, n_nodes: int = 4000, cutoff: float = 1e-12):
        sol = solve_care(dyn.A, dyn.B, cost.Q, cost.R)
        self.P = sol.P
        self.K_star = -np.linalg.solve(cost.R, dyn.B.T @ sol.P)
        self.D = dyn.A + dyn.B @ self.K_star
        self.B = dyn.B
        self.abscissa = spectral_abscissa(self.D)

        t_cut = 1.0
        for _ in range(80):
            if np.linalg.norm(self._direct(t_cut), 2) < cutoff:
                break
            t_cut *= 2.0
        self.t_cut = t_cut
        nodes = np.concatenate([[0.0], np.geomspace(t_cut * 1e-6, t_cut, n_nodes - 1)])
        self.nodes = nodes
        self.values = np.stack([self._direct(t) for t in nodes])

    def _direct(self, t: float) -> np.ndarray:
        E = matrix_exponential(self.D, t)
        return E.T @ self.P @ E @ self.B

    def __call__(self, taus) -> np.ndarray:
        """Interpolated weights for an array of times, shape (n, p, q)."""
        taus = np.asarray(taus, dtype=float)
        idx = np.clip(np.searchsorted(self.nodes, taus, side="right"), 1, self.nodes.size - 1)
        lo = self.nodes[idx - 1]
        hi = self.nodes[idx]
        w = ((taus - lo) / (hi - lo))[:, None, None]
        vals = (1.0 - w) * self.values[idx - 1] + w * self.values[idx]
        vals[taus >= self.t_cut] = 0.0
        return vals


def _per_step_gains(gains, n: int, q: int, p: int) -> list[tuple[np.ndarray, int]]:
    """Normalize the gains argument to run-length (K, count) segments."""
    if isinstance(gains, np.ndarray):
        if gains.shape != (n, q, p):
            raise DimensionError(f"per-step gains must be ({n}, {q}, {p}), got {gains.shape}")
        return [(gains, -1)]  # marker: already per-step
    segments = []
    total = 0
    for item in gains:
        if isinstance(item, tuple):
            K, count = item
        else:
            K, count = item, 1
        K = K.K if isinstance(K, Gain) else np.asarray(K, dtype=float)
        if K.shape != (q, p):
            raise DimensionError(f"gain must be ({q}, {p}), got {K.shape}")
        segments.append((K, int(count)))
        total += int(count)
    if total != n:
        raise DimensionError(f"gains cover {total} steps, trajectory has {n}")
    return segments


def decomposition_check(
    adaptive: Trajectory,
    gains,
    dyn: Dynamics,
    cost: CostSpec,
    T: float,
    cache: TransientWeightCache | None = None,
) -> RegretDecomposition:
    """Quadrature of the quadratic and cross regret terms up to time T.

    gains describes the feedback applied at each step: either an array of
    shape (n_steps, q, p) or an iterable of (K, step_count) pairs covering
    the trajectory.
    """
    n = adaptive.n_steps
    if n == 0:
        raise DimensionError("trajectory has no steps")
    dt = adaptive.dt
    t0 = adaptive.times[0]
    n_used = int(round((T - t0) / dt))
    if not (1 <= n_used <= n) or abs(adaptive.times[n_used] - T) > 0.5 * dt * (1 + 1e-9):
        raise GridMismatchError(f"T={T} is not a grid time within the trajectory")
    segments = _per_step_gains(gains, n, dyn.q, dyn.p)
    if cache is None:
        cache = TransientWeightCache(dyn, cost)
    K_star = cache.K_star

    X = adaptive.states[:n_used]
    # Deviation inputs y_k = (K_k - K*) x_k, built segment by segment.
    Y = np.empty((n_used, dyn.q))
    pos = 0
    for K, count in segments:
        if count == -1:  # per-step array
            Y[:] = np.einsum("kqp,kp->kq", K[:n_used], X) - X @ K_star.T
            pos = n_used
            break
        if pos >= n_used:
            break
        end = min(pos + count, n_used)
        Y[pos:end] = X[pos:end] @ (K - K_star).T
        pos = end

    quadratic = float(np.sum(Y * Y) * dt)
    weights = cache(T - adaptive.times[:n_used])
    cross = float(2.0 * np.sum(np.einsum("kp,kpq,kq->k", X, weights, Y)) * dt)
    return RegretDecomposition(quadratic_term=quadratic, cross_term=cross, L_T=quadratic - cross)
