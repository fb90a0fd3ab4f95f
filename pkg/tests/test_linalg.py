import numpy as np
import pytest

from ctlqr import (
    DimensionError,
    StabilityError,
    StabilizabilityError,
    airplane_model,
    is_hurwitz,
    matrix_exponential,
    optimal_gain,
    solve_care,
    solve_lyapunov,
    spectral_abscissa,
)
from ctlqr.linalg import CARE_RESIDUAL_RTOL


def care_residual(A, B, Q, R, P):
    """Independent residual oracle: substitute P back into the equation."""
    A, B, Q, R = map(np.atleast_2d, (A, B, Q, R))
    G = B @ np.linalg.solve(R, B.T)
    return np.linalg.norm(A.T @ P + P @ A - P @ G @ P + Q)


def random_system(rng, p, q):
    A = rng.standard_normal((p, p))
    B = rng.standard_normal((p, q))
    Q = rng.standard_normal((p, p))
    Q = Q @ Q.T + 0.1 * np.eye(p)
    R = rng.standard_normal((q, q))
    R = R @ R.T + 0.1 * np.eye(q)
    return A, B, Q, R


class TestIsHurwitz:
    def test_negative_identity(self):
        assert is_hurwitz(-np.eye(2))

    def test_zero_matrix(self):
        assert not is_hurwitz(np.zeros((2, 2)))

    def test_airplane_closed_loop(self):
        dyn, cost = airplane_model()
        K = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R)
        assert is_hurwitz(dyn.A + dyn.B @ K.K)

    def test_marginal_eigenvalue_with_margin(self):
        M = np.diag([-1.0, -1e-4])
        assert is_hurwitz(M)
        assert not is_hurwitz(M, tol_margin=1e-3)

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionError):
            is_hurwitz(np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(DimensionError):
            is_hurwitz(np.array([[np.nan, 0.0], [0.0, -1.0]]))


class TestSolveLyapunov:
    def test_minus_identity(self):
        S = solve_lyapunov(-np.eye(2), np.eye(2))
        np.testing.assert_allclose(S, 0.5 * np.eye(2), atol=1e-12)

    def test_minus_half_identity(self):
        S = solve_lyapunov(-0.5 * np.eye(3), np.eye(3))
        np.testing.assert_allclose(S, np.eye(3), atol=1e-12)

    def test_triangular_hand_solved(self):
        # F S + S F^T + I = 0 for F = [[-1, 1], [0, -2]] solved by hand:
        # -2a + 2b + 1 = 0, -3b + c = 0, -4c + 1 = 0.
        F = np.array([[-1.0, 1.0], [0.0, -2.0]])
        expected = np.array([[7.0 / 12.0, 1.0 / 12.0], [1.0 / 12.0, 1.0 / 4.0]])
        S = solve_lyapunov(F, np.eye(2))
        np.testing.assert_allclose(S, expected, atol=1e-12)

    def test_residual_certificate(self):
        rng = np.random.default_rng(11)
        for p in (2, 4, 7):
            F = rng.standard_normal((p, p)) - 2.0 * p * np.eye(p)
            W = rng.standard_normal((p, p))
            W = W @ W.T
            S = solve_lyapunov(F, W)
            resid = np.linalg.norm(F @ S + S @ F.T + W)
            assert resid <= 1e-9 * (1.0 + np.linalg.norm(W))
            assert np.linalg.eigvalsh(S).min() >= -1e-10

    def test_non_hurwitz_rejected(self):
        with pytest.raises(StabilityError):
            solve_lyapunov(np.eye(2), np.eye(2))


class TestSolveCare:
    def test_scalar_closed_form(self):
        # -2P - P^2 + 1 = 0, positive root sqrt(2) - 1.
        sol = solve_care([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert abs(sol.P[0, 0] - (np.sqrt(2.0) - 1.0)) < 1e-12
        assert sol.closed_loop_spectral_abscissa < 0

    def test_zero_b_degenerates_to_lyapunov(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((3, 3)) - 4.0 * np.eye(3)
        Q = rng.standard_normal((3, 3))
        Q = Q @ Q.T + np.eye(3)
        sol = solve_care(A, np.zeros((3, 2)), Q, np.eye(2))
        np.testing.assert_allclose(sol.P, solve_lyapunov(A.T, Q), atol=1e-8)

    def test_airplane_residual_and_stability(self):
        dyn, cost = airplane_model()
        sol = solve_care(dyn.A, dyn.B, cost.Q, cost.R)
        assert care_residual(dyn.A, dyn.B, cost.Q, cost.R, sol.P) <= 1e-8
        assert sol.closed_loop_spectral_abscissa < 0
        np.testing.assert_allclose(sol.P, sol.P.T, atol=1e-10)
        assert np.linalg.eigvalsh(sol.P).min() > 0

    def test_residual_property_random_systems(self):
        rng = np.random.default_rng(17)
        for p, q in ((2, 1), (3, 2), (5, 2), (6, 3)):
            A, B, Q, R = random_system(rng, p, q)
            sol = solve_care(A, B, Q, R)
            assert sol.residual <= CARE_RESIDUAL_RTOL * (1.0 + np.linalg.norm(Q))
            assert care_residual(A, B, Q, R, sol.P) <= 1e-8 * (1.0 + np.linalg.norm(Q))
            K = optimal_gain(A, B, Q, R)
            assert is_hurwitz(A + B @ K.K)

    def test_unstabilizable_pair_rejected(self):
        with pytest.raises(StabilizabilityError):
            solve_care(np.eye(2), np.zeros((2, 1)), np.eye(2), np.eye(1))

    def test_uncontrollable_unstable_mode_rejected(self):
        # Second state is unstable and unreachable.
        A = np.diag([-1.0, 2.0])
        B = np.array([[1.0], [0.0]])
        with pytest.raises(StabilizabilityError):
            solve_care(A, B, np.eye(2), np.eye(1))

    def test_indefinite_q_rejected(self):
        with pytest.raises(DimensionError):
            solve_care(-np.eye(2), np.eye(2), np.diag([1.0, -1.0]), np.eye(2))

    def test_newton_fallback_matches_schur(self):
        from ctlqr.linalg import _newton_kleinman

        dyn, cost = airplane_model()
        sol = solve_care(dyn.A, dyn.B, cost.Q, cost.R)
        K0 = optimal_gain(dyn.A, dyn.B, np.eye(4), np.eye(2)).K  # any stabilizing seed
        tol = 1e-8 * (1.0 + np.linalg.norm(cost.Q))
        P_newton = _newton_kleinman(dyn.A, dyn.B, cost.Q, cost.R, K0, tol)
        np.testing.assert_allclose(P_newton, sol.P, atol=1e-7)


class TestOptimalGain:
    def test_scalar(self):
        K = optimal_gain([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert abs(K.K[0, 0] + (np.sqrt(2.0) - 1.0)) < 1e-12

    def test_zero_b_zero_gain(self):
        K = optimal_gain(-np.eye(3), np.zeros((3, 2)), np.eye(3), np.eye(2))
        np.testing.assert_array_equal(K.K, np.zeros((2, 3)))

    def test_airplane_stabilizes(self):
        dyn, cost = airplane_model()
        K = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R)
        assert K.K.shape == (2, 4)
        assert is_hurwitz(dyn.A + dyn.B @ K.K)

    def test_gain_lipschitz_in_parameters(self):
        # Finite sensitivity of the feedback map around the airplane
        # parameters: ratios at spectral radii 1e-6 and 1e-2 agree to a
        # factor of 10 and stay bounded.
        dyn, cost = airplane_model()
        theta = dyn.theta()
        K0 = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R).K
        rng = np.random.default_rng(29)
        ratios = {1e-6: [], 1e-2: []}
        for _ in range(50):
            direction = rng.standard_normal(theta.shape)
            direction /= np.linalg.norm(direction, 2)
            for scale in ratios:
                perturbed = theta + scale * direction
                K = optimal_gain(perturbed[:, :4], perturbed[:, 4:], cost.Q, cost.R).K
                ratios[scale].append(np.linalg.norm(K - K0, 2) / scale)
        max_small, max_large = max(ratios[1e-6]), max(ratios[1e-2])
        assert max(max_small, max_large) < 1e6
        assert max_small / max_large < 10.0
        assert max_large / max_small < 10.0


class TestMatrixExponential:
    def test_zero_matrix(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3)), 2.0), np.eye(3))

    def test_diagonal(self):
        E = matrix_exponential(np.diag([-1.0, -2.0]), 1.0)
        np.testing.assert_allclose(E, np.diag([np.exp(-1.0), np.exp(-2.0)]), rtol=1e-12)

    def test_nilpotent_series_truncates(self):
        M = np.array([[0.0, 1.0], [0.0, 0.0]])
        for t in (0.5, 1.0, 7.0):
            np.testing.assert_allclose(
                matrix_exponential(M, t), np.array([[1.0, t], [0.0, 1.0]]), rtol=1e-14
            )

    def test_semigroup_property(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((4, 4))
        for s, t in ((0.3, 0.7), (1.5, 2.5), (0.0, 4.0)):
            lhs = matrix_exponential(M, s + t)
            rhs = matrix_exponential(M, s) @ matrix_exponential(M, t)
            assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) < 1e-9

    def test_negative_time_rejected(self):
        with pytest.raises(DimensionError):
            matrix_exponential(np.eye(2), -1.0)

    def test_accuracy_vs_eigendecomposition(self):
        # Symmetric case has an exact eigendecomposition oracle.
        rng = np.random.default_rng(8)
        M = rng.standard_normal((5, 5))
        M = 0.5 * (M + M.T)
        w, V = np.linalg.eigh(M)
        for t in (0.1, 1.0, 10.0):
            exact = (V * np.exp(w * t)) @ V.T
            got = matrix_exponential(M, t)
            assert np.linalg.norm(got - exact) / np.linalg.norm(exact) < 1e-10


def test_spectral_abscissa_matches_eigs():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((6, 6))
    assert spectral_abscissa(M) == pytest.approx(np.real(np.linalg.eigvals(M)).max())


def test_lyapunov_riccati_consistency_property():
    # With B = 0 and Hurwitz A the Riccati equation loses its quadratic
    # term; both solvers must agree.
    rng = np.random.default_rng(41)
    for p in (2, 3, 5):
        A = rng.standard_normal((p, p)) - 3.0 * p * np.eye(p)
        Q = rng.standard_normal((p, p))
        Q = Q @ Q.T + np.eye(p)
        sol = solve_care(A, np.zeros((p, 1)), Q, np.eye(1))
        np.testing.assert_allclose(sol.P, solve_lyapunov(A.T, Q), atol=1e-8)
