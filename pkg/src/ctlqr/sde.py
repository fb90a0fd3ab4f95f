"""Euler-Maruyama integration of the controlled linear diffusion
dx = (A x + B u) dt + sigma dW under static feedback u = K x, with
streaming accumulation of the integrals the identification step needs:

    V  += z z^T dt        z = [x; u], shape (p + q,)
    C  += z (x' - x)^T    realized state increments, Ito (left-endpoint)
    ZW += z dW^T          raw Brownian increments, for the self-normalized
                          statistic

plus a closed-form first/second-moment oracle used to validate the
integrator. Left-endpoint quadrature is used for every integral: with
the Ito convention it is the only correct choice for C and ZW, and the
running cost follows the same rule for consistency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .errors import BlowUpError, DimensionError
from .linalg import Gain, is_hurwitz, matrix_exponential, solve_lyapunov
from .model import CostSpec, Dynamics
from .noise import NoisePath

__all__ = [
    "Trajectory",
    "EstimatorAccumulators",
    "simulate_segment",
    "closed_form_moments",
    "self_normalized_statistic",
]

DEFAULT_BLOW_UP_THRESHOLD = 1e6


@dataclass(frozen=True)
class Trajectory:
    """Sampled closed-loop path on a uniform time grid.

    All four arrays have equal length; running_cost[i] is the
    left-endpoint quadrature of x^T Q x + u^T R u from the segment start
    up to times[i] (so running_cost[0] == 0). The final input row is the
    feedback evaluated at the final state; it is never applied.
    """

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    running_cost: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        inputs = np.asarray(self.inputs, dtype=float)
        running_cost = np.asarray(self.running_cost, dtype=float)
        n = times.shape[0]
        if not (states.shape[0] == inputs.shape[0] == running_cost.shape[0] == n):
            raise DimensionError("times, states, inputs, running_cost must have equal length")
        if n >= 2:
            steps = np.diff(times)
            if steps.min() <= 0.0:
                raise DimensionError("times must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise DimensionError("times must be uniformly spaced")
        if n >= 2 and np.any(np.diff(running_cost) < 0.0):
            raise DimensionError("running_cost must be non-decreasing")
        for name, arr in (("times", times), ("states", states), ("inputs", inputs)):
            if not np.all(np.isfinite(arr)):
                raise DimensionError(f"{name} contains non-finite values")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "running_cost", running_cost)

    @property
    def n_steps(self) -> int:
        return max(self.times.shape[0] - 1, 0)

    @property
    def dt(self) -> float:
        if self.times.shape[0] < 2:
            raise DimensionError("trajectory has no steps, dt undefined")
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class EstimatorAccumulators:
    """Streaming integrals over the whole trajectory seen so far.

    V is (d, d) with d = p + q, C is (d, p), noise_integral is (d, p);
    elapsed is the total integrated time. Immutable: simulation returns a
    new instance with the segment contributions added.
    """

    V: np.ndarray
    C: np.ndarray
    noise_integral: np.ndarray
    elapsed: float

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        C = np.asarray(self.C, dtype=float)
        ZW = np.asarray(self.noise_integral, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise DimensionError(f"V must be square, got {V.shape}")
        if C.shape[0] != V.shape[0] or ZW.shape != C.shape:
            raise DimensionError("C and noise_integral must be (d, p) with d matching V")
        for name, arr in (("V", V), ("C", C), ("noise_integral", ZW)):
            if not np.all(np.isfinite(arr)):
                raise DimensionError(f"{name} contains non-finite values")
        if self.elapsed < 0.0:
            raise DimensionError("elapsed must be >= 0")
        object.__setattr__(self, "V", 0.5 * (V + V.T))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "noise_integral", ZW)
        object.__setattr__(self, "elapsed", float(self.elapsed))

    @classmethod
    def zero(cls, p: int, q: int) -> "EstimatorAccumulators":
        d = p + q
        return cls(V=np.zeros((d, d)), C=np.zeros((d, p)), noise_integral=np.zeros((d, p)), elapsed=0.0)

    @property
    def d(self) -> int:
        return self.V.shape[0]


def _empty_trajectory(p: int, q: int) -> Trajectory:
    return Trajectory(
        times=np.zeros(0),
        states=np.zeros((0, p)),
        inputs=np.zeros((0, q)),
        running_cost=np.zeros(0),
    )


def simulate_segment(
    dyn: Dynamics,
    cost: CostSpec,
    K: Gain,
    x0,
    duration: float,
    dt: float,
    noise: NoisePath,
    acc: EstimatorAccumulators,
    *,
    t0: float = 0.0,
    inputs=None,
    blow_up_threshold: float = DEFAULT_BLOW_UP_THRESHOLD,
    update_accumulators: bool = True,
    backend: str | None = None,
) -> tuple[Trajectory, EstimatorAccumulators, np.ndarray]:
    """Integrate one segment under a frozen gain (or exogenous probe inputs).

    The step rule is x_{k+1} = x_k + (A x_k + B u_k) dt + sigma dW_k with
    u_k = K x_k, duration rounded to the nearest whole number of steps.
    Passing `inputs` (shape (n, q)) replaces the feedback with a
    precomputed input sequence; this exists for identification probes and
    tests. Raises BlowUpError carrying the explosion time if the state
    norm exceeds blow_up_threshold.
    """
    p, q = dyn.p, dyn.q
    if dt <= 0.0:
        raise DimensionError(f"dt must be positive, got {dt}")
    if duration < 0.0:
        raise DimensionError(f"duration must be >= 0, got {duration}")
    x0 = np.ascontiguousarray(x0, dtype=float).reshape(p)
    n = int(round(duration / dt))
    if n == 0:
        return _empty_trajectory(p, q), acc, x0.copy()
    if not np.isclose(noise.dt, dt, rtol=1e-9, atol=0.0):
        raise DimensionError(f"noise path dt={noise.dt} does not match dt={dt}")
    if noise.n_steps < n:
        raise DimensionError(f"noise provides {noise.n_steps} increments, need {n}")
    if K.K.shape != (q, p):
        raise DimensionError(f"gain must be ({q}, {p}), got {K.K.shape}")
    u_seq = None
    if inputs is not None:
        u_seq = np.ascontiguousarray(inputs, dtype=float)
        if u_seq.shape != (n, q):
            raise DimensionError(f"inputs must be ({n}, {q}), got {u_seq.shape}")

    _, kernel = _backend.get_backend(backend)
    d = p + q
    states = np.empty((n + 1, p))
    inputs_arr = np.empty((n + 1, q))
    step_costs = np.empty(n)
    Vd = np.zeros((d, d))
    Cd = np.zeros((d, p))
    Md = np.zeros((d, p))

    blow_step = kernel.run_segment(
        np.ascontiguousarray(dyn.A),
        np.ascontiguousarray(dyn.B),
        np.ascontiguousarray(K.K),
        np.ascontiguousarray(dyn.sigma),
        np.ascontiguousarray(cost.Q),
        np.ascontiguousarray(cost.R),
        x0,
        float(dt),
        noise.increments[:n],
        u_seq,
        float(blow_up_threshold),
        states,
        inputs_arr,
        step_costs,
        Vd,
        Cd,
        Md,
        bool(update_accumulators),
    )
    if blow_step >= 0:
        t_blow = t0 + blow_step * dt
        nrm = float(np.linalg.norm(states[blow_step]))
        raise BlowUpError(
            f"state norm {nrm:.3e} exceeded {blow_up_threshold:.3e} at t={t_blow:.6g}",
            time=t_blow,
            state_norm=nrm,
        )

    times = t0 + dt * np.arange(n + 1)
    running = np.concatenate([[0.0], np.cumsum(step_costs) * dt])
    traj = Trajectory(times=times, states=states, inputs=inputs_arr, running_cost=running)
    if update_accumulators:
        new_acc = EstimatorAccumulators(
            V=acc.V + Vd,
            C=acc.C + Cd,
            noise_integral=acc.noise_integral + Md,
            elapsed=acc.elapsed + n * dt,
        )
    else:
        new_acc = acc
    return traj, new_acc, states[-1].copy()


def closed_form_moments(dyn: Dynamics, K: Gain, x0, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean and covariance of the closed loop at time t.

    mean = e^{Mt} x0 and cov = int_0^t e^{Ms} sigma sigma^T e^{M^T s} ds
    with M = A + B K. For Hurwitz M the covariance uses the Lyapunov
    difference identity cov(t) = S_inf - e^{Mt} S_inf e^{M^T t}; otherwise
    a composite Simpson rule on a fine grid evaluates the integral.
    """
    p = dyn.p
    x0 = np.asarray(x0, dtype=float).reshape(p)
    if t < 0.0:
        raise DimensionError(f"t must be >= 0, got {t}")
    M = dyn.A + dyn.B @ K.K
    W = dyn.sigma @ dyn.sigma.T
    Et = matrix_exponential(M, t)
    mean = Et @ x0
    if t == 0.0:
        return mean, np.zeros((p, p))
    if is_hurwitz(M):
        S_inf = solve_lyapunov(M, W)
        cov = S_inf - Et @ S_inf @ Et.T
    else:
        n_intervals = 2000
        s_grid = np.linspace(0.0, t, n_intervals + 1)
        vals = np.empty((n_intervals + 1, p, p))
        for i, s in enumerate(s_grid):
            Es = matrix_exponential(M, s)
            vals[i] = Es @ W @ Es.T
        h = t / n_intervals
        weights = np.full(n_intervals + 1, 2.0)
        weights[1:-1:2] = 4.0
        weights[0] = weights[-1] = 1.0
        cov = (h / 3.0) * np.tensordot(weights, vals, axes=1)
    return mean, 0.5 * (cov + cov.T)


def self_normalized_statistic(acc: EstimatorAccumulators) -> float:
    """|| (I + V)^{-1/2} int z dW^T ||_2^2 / (d^2 log lambda_max(V)).

    Defined once lambda_max(V) > 1; raises ValueError before that (the
    normalizer log lambda_max would be non-positive).
    """
    V = acc.V
    d = acc.d
    lam_max = float(np.linalg.eigvalsh(V).max())
    if lam_max <= 1.0:
        raise ValueError(
            f"statistic undefined: lambda_max(V) = {lam_max:.3e} <= 1 (log non-positive)"
        )
    evals, evecs = np.linalg.eigh(np.eye(d) + V)
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    spectral = np.linalg.norm(inv_sqrt @ acc.noise_integral, 2)
    return float(spectral**2 / (d * d * np.log(lam_max)))
