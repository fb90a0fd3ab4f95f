"""Dense matrix kernels: stability tests, Lyapunov and continuous-time
algebraic Riccati solvers, and the matrix exponential.

Everything here is a pure function of its inputs and sized for dense,
desk-scale problems (state + input dimension up to a few dozen).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionError, StabilityError, StabilizabilityError

__all__ = [
    "Gain",
    "RiccatiSolution",
    "is_hurwitz",
    "spectral_abscissa",
    "solve_lyapunov",
    "solve_care",
    "optimal_gain",
    "matrix_exponential",
]

# Frobenius residual tolerances certified by the Riccati / Lyapunov solvers.
CARE_RESIDUAL_RTOL = 1e-8
LYAPUNOV_RESIDUAL_RTOL = 1e-9


def _as_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} has non-finite entries")
    return M


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} has non-finite entries")
    return M


def _check_spd(M, name):
    M = _as_square(M, name)
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(M).max())):
        raise DimensionError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    if eigs.min() <= 0.0:
        raise DimensionError(f"{name} must be positive definite (min eigenvalue {eigs.min():.3e})")
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class Gain:
    """Static linear feedback u = K x.

    K has shape (q, p): inputs per unit state.
    """

    K: np.ndarray

    def __post_init__(self):
        K = _as_matrix(self.K, "K")
        object.__setattr__(self, "K", K)

    @property
    def q(self):
        return self.K.shape[0]

    @property
    def p(self):
        return self.K.shape[1]


@dataclass(frozen=True)
class RiccatiSolution:
    """Stabilizing solution of the continuous-time algebraic Riccati equation.

    Attributes
    ----------
    P : ndarray
        Symmetric positive-semidefinite cost-to-go matrix.
    residual : float
        Frobenius norm of A^T P + P A - P B R^-1 B^T P + Q.
    closed_loop_spectral_abscissa : float
        Largest real part among eigenvalues of A - B R^-1 B^T P; negative
        for a stabilizing solution.
    """

    P: np.ndarray
    residual: float
    closed_loop_spectral_abscissa: float


def spectral_abscissa(M) -> float:
    """Largest real part among the eigenvalues of a square matrix."""
    M = _as_square(M, "M")
    return float(np.real(np.linalg.eigvals(M)).max())


def is_hurwitz(M, tol_margin: float = 0.0) -> bool:
    """True iff every eigenvalue of M has real part strictly below -tol_margin."""
    return spectral_abscissa(M) < -tol_margin


def solve_lyapunov(F, W) -> np.ndarray:
    """Solve F S + S F^T + W = 0 for symmetric S, with F Hurwitz.

    Uses Kronecker vectorization: (I (x) F + F (x) I) vec(S) = -vec(W).
    The O(n^6) solve is fine at the dense desk-scale sizes this package
    targets and keeps the solver self-contained.
    """
    F = _as_square(F, "F")
    W = _as_square(W, "W")
    if F.shape != W.shape:
        raise DimensionError(f"F and W must have the same shape, got {F.shape} vs {W.shape}")
    if not is_hurwitz(F):
        raise StabilityError("F must be Hurwitz for a unique positive-semidefinite solution")
    W = 0.5 * (W + W.T)
    n = F.shape[0]
    eye = np.eye(n)
    lhs = np.kron(eye, F) + np.kron(F, eye)
    try:
        vec_s = np.linalg.solve(lhs, -W.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Lyapunov system is numerically singular: {exc}") from exc
    S = vec_s.reshape((n, n), order="F")
    S = 0.5 * (S + S.T)
    residual = np.linalg.norm(F @ S + S @ F.T + W)
    tol = LYAPUNOV_RESIDUAL_RTOL * (1.0 + np.linalg.norm(W))
    if residual > tol:
        raise ConvergenceError(
            f"Lyapunov residual {residual:.3e} exceeds tolerance {tol:.3e}", residual=residual
        )
    return S


def _care_residual(A, B, Q, R, P) -> float:
    G = B @ np.linalg.solve(R, B.T)
    return float(np.linalg.norm(A.T @ P + P @ A - P @ G @ P + Q))


def _newton_kleinman(A, B, Q, R, K0, tol, max_iter=100):
    """Newton iteration for the Riccati equation; each step is a Lyapunov solve.

    Requires a stabilizing initial gain K0. Quadratically convergent and
    monotone from above, so it doubles as a residual-certified fallback
    when the Schur path fails.
    """
    K = K0
    P = None
    residual = np.inf
    for _ in range(max_iter):
        Acl = A + B @ K
        if not is_hurwitz(Acl):
            raise StabilityError("Newton iterate lost closed-loop stability")
        P = solve_lyapunov(Acl.T, Q + K.T @ (np.asarray(R) @ K))
        K = -np.linalg.solve(R, B.T @ P)
        residual = _care_residual(A, B, Q, R, P)
        if residual <= tol:
            return 0.5 * (P + P.T)
    raise ConvergenceError(
        f"Newton iteration stalled at residual {residual:.3e} (tolerance {tol:.3e})",
        residual=residual,
    )


def _stabilizing_seed(A, B):
    """Search a short list of candidate gains for one that stabilizes A + B K."""
    p, q = A.shape[0], B.shape[1]
    candidates = [np.zeros((q, p))]
    for scale in (1.0, 10.0, 100.0, 1000.0):
        candidates.append(-scale * B.T)
    for K in candidates:
        if is_hurwitz(A + B @ K):
            return K
    return None


def solve_care(A, B, Q, R) -> RiccatiSolution:
    """Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0.

    Method: ordered real Schur decomposition of the 2p x 2p Hamiltonian
    [[A, -B R^-1 B^T], [-Q, -A^T]], taking the stable invariant subspace
    [U1; U2] and P = U2 U1^-1. If that path fails numerically, a
    Newton-Kleinman iteration seeded with a stabilizing gain retries.

    Raises StabilizabilityError when no stabilizing solution exists
    (detected, not assumed) and ConvergenceError when the fallback cannot
    certify the residual.
    """
    A = _as_square(A, "A")
    B = _as_matrix(B, "B")
    if B.shape[0] != A.shape[0]:
        raise DimensionError(f"B must have {A.shape[0]} rows, got {B.shape}")
    Q = _check_spd(Q, "Q")
    R = _check_spd(R, "R")
    if Q.shape[0] != A.shape[0] or R.shape[0] != B.shape[1]:
        raise DimensionError("Q must match the state dimension and R the input dimension")
    p = A.shape[0]
    tol = CARE_RESIDUAL_RTOL * (1.0 + np.linalg.norm(Q))

    G = B @ np.linalg.solve(R, B.T)
    H = np.block([[A, -G], [-Q, -A.T]])

    P = None
    schur_failure = None
    try:
        _, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
        if sdim != p:
            raise StabilizabilityError(
                f"Hamiltonian has {sdim} stable eigenvalues, expected {p}: "
                "no stabilizing solution (pair likely unstabilizable)"
            )
        U1 = Z[:p, :p]
        U2 = Z[p:, :p]
        # A singular U1 means the stable subspace has no graph
        # representation: no stabilizing solution exists for this pair.
        if np.linalg.cond(U1) > 1e13:
            raise StabilizabilityError(
                "stable invariant subspace is degenerate (singular U1): "
                "no stabilizing solution (pair likely unstabilizable)"
            )
        P = scipy.linalg.solve(U1.T, U2.T).T
        P = 0.5 * (P + P.T)
        if not np.all(np.isfinite(P)):
            raise np.linalg.LinAlgError("non-finite Riccati solution from Schur path")
    except StabilizabilityError:
        raise
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        schur_failure = exc
        P = None

    if P is not None:
        residual = _care_residual(A, B, Q, R, P)
        abscissa = spectral_abscissa(A - G @ P)
        if residual <= tol and abscissa < 0.0:
            return RiccatiSolution(P=P, residual=residual, closed_loop_spectral_abscissa=abscissa)
        schur_failure = ConvergenceError(
            f"Schur solution residual {residual:.3e} or abscissa {abscissa:.3e} not acceptable",
            residual=residual,
        )

    K0 = _stabilizing_seed(A, B)
    if K0 is None:
        raise StabilizabilityError(
            "Schur path failed and no stabilizing seed gain was found"
        ) from schur_failure
    P = _newton_kleinman(A, B, Q, R, K0, tol)
    residual = _care_residual(A, B, Q, R, P)
    abscissa = spectral_abscissa(A - G @ P)
    if abscissa >= 0.0:
        raise StabilizabilityError("fallback produced a non-stabilizing solution")
    return RiccatiSolution(P=P, residual=residual, closed_loop_spectral_abscissa=abscissa)


def optimal_gain(A, B, Q, R) -> Gain:
    """Feedback K = -R^-1 B^T P from the stabilizing Riccati solution.

    A + B K is Hurwitz whenever solve_care succeeds.
    """
    B = _as_matrix(B, "B")
    sol = solve_care(A, B, Q, R)
    K = -np.linalg.solve(np.asarray(R, dtype=float), B.T @ sol.P)
    return Gain(K=K)


def matrix_exponential(M, t: float) -> np.ndarray:
    """e^{M t} by scaling-and-squaring with a Pade approximant.

    Delegates to scipy.linalg.expm, which implements exactly that method
    with adaptive order selection.
    """
    M = _as_square(M, "M")
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise DimensionError(f"t must be finite and >= 0, got {t}")
    if t == 0.0:
        return np.eye(M.shape[0])
    return scipy.linalg.expm(M * t)
