"""Continuous-time least squares for the plant matrices and the
randomization that keeps the policy exploring.

The regression inverts the state-input covariance integral V against the
cross integral C = int z dx^T; the randomized estimate adds a Gaussian
matrix scaled by gamma^{-1/4}, large enough to excite identification but
vanishing fast enough to preserve control performance. The perturbation
is stored on the estimate so experiments can separate regression error
from injected exploration noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RankDeficiencyError, StabilizabilityError
from .linalg import is_hurwitz, optimal_gain
from .model import CostSpec, Dynamics
from .sde import EstimatorAccumulators

__all__ = [
    "ParameterEstimate",
    "least_squares",
    "randomize",
    "estimation_error",
    "draw_initial_estimate",
]

# Relative eigenvalue floor below which an unridged solve is refused.
_UNRIDGED_RTOL = 1e-12


@dataclass(frozen=True)
class ParameterEstimate:
    """Randomized estimate theta = [A_hat, B_hat] of shape (p, p + q).

    theta is ls_part + perturbation bit-exactly; gamma records the
    randomization horizon whose ^(-1/4) power scaled the perturbation
    (0 for the initial estimate, whose spread is a configured constant).
    """

    theta: np.ndarray
    episode_index: int
    ls_part: np.ndarray
    perturbation: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        ls = np.asarray(self.ls_part, dtype=float)
        pert = np.asarray(self.perturbation, dtype=float)
        if theta.shape != ls.shape or theta.shape != pert.shape:
            raise DimensionError("theta, ls_part, perturbation must share one shape")
        if not np.all(np.isfinite(theta)):
            raise DimensionError("theta contains non-finite values")
        if not np.array_equal(theta, ls + pert):
            raise DimensionError("theta must equal ls_part + perturbation exactly")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "ls_part", ls)
        object.__setattr__(self, "perturbation", pert)

    def split(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        """(A_hat, B_hat) for state dimension p."""
        return self.theta[:, :p], self.theta[:, p:]


def least_squares(acc: EstimatorAccumulators, ridge: float = 0.0) -> np.ndarray:
    """C^T (V + ridge I)^{-1}, the (p, d) regression estimate of [A, B].

    With ridge = 0 the covariance must satisfy
    lambda_min(V) > 1e-12 lambda_max(V); otherwise a RankDeficiencyError
    names the offending eigenvalue. A tiny ridge regularizes the earliest
    episodes and its effect vanishes as V grows.
    """
    if acc.elapsed <= 0.0:
        raise DimensionError("accumulators cover zero elapsed time")
    if ridge < 0.0:
        raise DimensionError(f"ridge must be >= 0, got {ridge}")
    V = acc.V
    if ridge == 0.0:
        eigs = np.linalg.eigvalsh(V)
        lam_min, lam_max = float(eigs.min()), float(eigs.max())
        if lam_min <= _UNRIDGED_RTOL * lam_max:
            raise RankDeficiencyError(
                f"V is rank-deficient: lambda_min = {lam_min:.6e} "
                f"(lambda_max = {lam_max:.6e}); pass ridge > 0",
                lambda_min=lam_min,
            )
    lhs = V + ridge * np.eye(acc.d)
    return np.linalg.solve(lhs, acc.C).T


def randomize(ls: np.ndarray, gamma_n: float, rng, episode_index: int = 0) -> ParameterEstimate:
    """Add an i.i.d. Gaussian matrix with entry std gamma_n^{-1/4}."""
    ls = np.asarray(ls, dtype=float)
    if gamma_n <= 0.0:
        raise DimensionError(f"gamma_n must be positive, got {gamma_n}")
    perturbation = gamma_n ** (-0.25) * rng.standard_normal(ls.shape)
    return ParameterEstimate(
        theta=ls + perturbation,
        episode_index=episode_index,
        ls_part=ls,
        perturbation=perturbation,
        gamma=float(gamma_n),
    )


def estimation_error(est: ParameterEstimate, truth: Dynamics) -> float:
    """Spectral-norm distance || [A_hat, B_hat] - [A, B] ||_2."""
    theta_true = truth.theta()
    if est.theta.shape != theta_true.shape:
        raise DimensionError(
            f"estimate shape {est.theta.shape} does not match plant shape {theta_true.shape}"
        )
    return float(np.linalg.norm(est.theta - theta_true, 2))


def draw_initial_estimate(
    dyn: Dynamics,
    cost: CostSpec,
    rng,
    std: float = 0.05,
    max_redraws: int = 100,
) -> tuple[ParameterEstimate, int]:
    """Initial estimate: truth plus entrywise N(0, std^2), redrawn until the
    certainty-equivalent gain stabilizes the true plant.

    The stability check uses the true matrices; it stands in for the
    initial-stabilization schemes this package deliberately leaves out,
    and is reported (redraw count) rather than hidden. Returns
    (estimate, redraws).
    """
    theta_true = dyn.theta()
    for redraws in range(max_redraws + 1):
        perturbation = std * rng.standard_normal(theta_true.shape)
        theta0 = theta_true + perturbation
        try:
            gain = optimal_gain(theta0[:, : dyn.p], theta0[:, dyn.p :], cost.Q, cost.R)
        except Exception:
            continue
        if is_hurwitz(dyn.A + dyn.B @ gain.K):
            est = ParameterEstimate(
                theta=theta0,
                episode_index=0,
                ls_part=theta_true,
                perturbation=perturbation,
                gamma=0.0,
            )
            return est, redraws
    raise StabilizabilityError(
        f"no stabilizing initial estimate found in {max_redraws} redraws (std={std})"
    )
