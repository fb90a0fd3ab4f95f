"""Plant and cost definitions, assumption checks, and the airplane benchmark.

A plant is a linear Ito diffusion dx = (A x + B u) dt + sigma dW with
quadratic running cost x^T Q x + u^T R u. The two standing requirements on
a usable plant are: (A, B) admits a stabilizing feedback, and sigma is
full-rank so the noise excites every state direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, StabilityError
from .linalg import Gain, is_hurwitz, solve_care, solve_lyapunov
from . import linalg

__all__ = [
    "Dynamics",
    "CostSpec",
    "ValidationReport",
    "airplane_model",
    "validate",
    "stationary_covariance",
]

# Relative threshold for the sigma full-rank test: smallest singular value
# must exceed this fraction of the largest.
SIGMA_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Dynamics:
    """Plant matrices for dx = (A x + B u) dt + sigma dW.

    Shapes: A is (p, p), B is (p, q), sigma is (p, p). Construction checks
    shapes and finiteness only; the stabilizability and noise-rank
    assumptions are checked by :func:`validate`, which must be able to
    report on deliberately broken plants.
    """

    A: np.ndarray
    B: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        A = linalg._as_square(self.A, "A")
        B = linalg._as_matrix(self.B, "B")
        sigma = linalg._as_square(self.sigma, "sigma")
        if B.shape[0] != A.shape[0]:
            raise DimensionError(f"B must have {A.shape[0]} rows, got {B.shape}")
        if sigma.shape[0] != A.shape[0]:
            raise DimensionError(f"sigma must be {A.shape[0]}x{A.shape[0]}, got {sigma.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def q(self) -> int:
        return self.B.shape[1]

    def theta(self) -> np.ndarray:
        """Stacked parameter matrix [A, B] of shape (p, p + q)."""
        return np.hstack([self.A, self.B])


@dataclass(frozen=True)
class CostSpec:
    """Quadratic cost weights; both must be symmetric positive definite."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        Q = linalg._as_square(self.Q, "Q")
        R = linalg._as_square(self.R, "R")
        for name, M in (("Q", Q), ("R", R)):
            if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(M).max())):
                raise DimensionError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(M).min() <= 0.0:
                raise DimensionError(f"{name} must be positive definite")
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "R", 0.5 * (R + R.T))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the plant/cost assumption checks.

    passed is the conjunction of every sub-check; messages lists the
    failures in check order.
    """

    sigma_full_rank: bool
    sigma_smallest_sv: float
    sigma_largest_sv: float
    stabilizable: bool
    care_residual: float
    q_positive_definite: bool
    r_positive_definite: bool
    passed: bool
    messages: tuple = field(default_factory=tuple)


def airplane_model() -> tuple[Dynamics, CostSpec]:
    """Four-state, two-input lateral-directional airplane benchmark.

    Constants are embedded as exact decimal literals so acceptance runs are
    bit-stable; user-defined plants go through the experiment module's file
    loader instead.
    """
    A = np.array(
        [
            [-0.185, 0.1475, -0.9825, 0.1120],
            [-0.347, -1.710, 0.9029, -0.58e-6],
            [1.174, -0.0825, -0.1826, -0.44e-7],
            [0.0, 1.0, 0.1429, 0.0],
        ]
    )
    B = np.array(
        [
            [-0.4470e-3, 0.4020e-3],
            [0.3715, 0.0549],
            [0.0265, -0.0135],
            [0.0, 0.0],
        ]
    )
    sigma = 0.2 * np.eye(4)
    dyn = Dynamics(A=A, B=B, sigma=sigma)
    cost = CostSpec(Q=np.eye(4), R=0.1 * np.eye(2))
    return dyn, cost


def validate(dyn: Dynamics, cost: CostSpec) -> ValidationReport:
    """Check the standing assumptions; never raises, failures go in the report."""
    messages = []

    svals = np.linalg.svd(dyn.sigma, compute_uv=False)
    smin, smax = float(svals.min()), float(svals.max())
    sigma_ok = smax > 0.0 and smin > SIGMA_RANK_RTOL * smax
    if not sigma_ok:
        messages.append(
            f"noise gain rank-deficient (smallest singular value {smin:.3e} vs largest {smax:.3e})"
        )

    care_residual = float("nan")
    try:
        sol = solve_care(dyn.A, dyn.B, cost.Q, cost.R)
        stabilizable = True
        care_residual = sol.residual
    except Exception as exc:  # report, don't raise
        stabilizable = False
        messages.append(f"unstabilizable: {exc}")

    q_ok = bool(np.linalg.eigvalsh(cost.Q).min() > 0.0)
    r_ok = bool(np.linalg.eigvalsh(cost.R).min() > 0.0)
    if not q_ok:
        messages.append("Q is not positive definite")
    if not r_ok:
        messages.append("R is not positive definite")

    return ValidationReport(
        sigma_full_rank=sigma_ok,
        sigma_smallest_sv=smin,
        sigma_largest_sv=smax,
        stabilizable=stabilizable,
        care_residual=care_residual,
        q_positive_definite=q_ok,
        r_positive_definite=r_ok,
        passed=sigma_ok and stabilizable and q_ok and r_ok,
        messages=tuple(messages),
    )


def stationary_covariance(dyn: Dynamics, K: Gain) -> np.ndarray:
    """Steady-state covariance of the closed loop under u = K x.

    Solves (A + B K) S + S (A + B K)^T + sigma sigma^T = 0. Positive
    definite whenever sigma is full-rank and the closed loop is Hurwitz.
    """
    Acl = dyn.A + dyn.B @ K.K
    if not is_hurwitz(Acl):
        raise StabilityError("closed loop A + B K is not Hurwitz; no stationary covariance")
    return solve_lyapunov(Acl, dyn.sigma @ dyn.sigma.T)
