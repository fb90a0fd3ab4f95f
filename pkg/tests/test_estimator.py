import numpy as np
import pytest

from ctlqr import (
    CostSpec,
    DimensionError,
    Dynamics,
    Gain,
    NoisePath,
    RankDeficiencyError,
    airplane_model,
    draw_initial_estimate,
    estimation_error,
    is_hurwitz,
    least_squares,
    randomize,
    simulate_segment,
)
from ctlqr.estimator import ParameterEstimate
from ctlqr.sde import EstimatorAccumulators


def make_acc(V, C, elapsed=1.0):
    d, p = C.shape
    return EstimatorAccumulators(V=V, C=C, noise_integral=np.zeros((d, p)), elapsed=elapsed)


class TestLeastSquares:
    def test_identity_v_zero_c(self):
        acc = make_acc(np.eye(3), np.zeros((3, 2)))
        np.testing.assert_array_equal(least_squares(acc), np.zeros((2, 3)))

    def test_recovers_from_euler_exact_data(self):
        # sigma = 0 makes the simulated increments exactly linear in z, so
        # the regression is exact up to conditioning.
        A = -np.eye(2)
        B = np.eye(2)
        dyn = Dynamics(A=A, B=B, sigma=np.zeros((2, 2)))
        cost = CostSpec(Q=np.eye(2), R=np.eye(2))
        rng = np.random.default_rng(123)
        n = 5000
        dt = 1e-2
        u = rng.standard_normal((n, 2))
        noise = NoisePath(seed=None, dt=dt, increments=np.zeros((n, 2)))
        _, acc, _ = simulate_segment(
            dyn, cost, Gain(K=np.zeros((2, 2))), np.zeros(2), n * dt, dt, noise,
            EstimatorAccumulators.zero(2, 2), inputs=u,
        )
        theta = least_squares(acc, ridge=0.0)
        np.testing.assert_allclose(theta, np.hstack([A, B]), atol=1e-6)
        # ridge continuity on the same well-conditioned data
        d6 = np.linalg.norm(least_squares(acc, ridge=1e-6) - theta, 2)
        d9 = np.linalg.norm(least_squares(acc, ridge=1e-9) - theta, 2)
        assert d6 < 1e-4 and d9 < 1e-4

    def test_zoh_data_has_order_dt_bias(self):
        # Data generated by the exact zero-order-hold discretization of
        # dx = (Ax + Bu) dt (no noise): x' = e^{A dt} x + A^{-1}(e^{A dt}-I) B u.
        # Regressing the continuous-time model on it leaves an O(dt) bias.
        A = -np.eye(2)
        B = np.eye(2)
        dt, T = 1e-3, 50.0
        n = int(T / dt)
        Ad = np.exp(-dt) * np.eye(2)
        Bd = (1.0 - np.exp(-dt)) * np.eye(2)
        rng = np.random.default_rng(7)
        U = rng.standard_normal((n, 2))
        X = np.zeros((n + 1, 2))
        for k in range(n):
            X[k + 1] = Ad @ X[k] + Bd @ U[k]
        Z = np.hstack([X[:-1], U])
        V = (Z.T @ Z) * dt
        C = Z.T @ np.diff(X, axis=0)
        theta = least_squares(make_acc(V, C, elapsed=T), ridge=0.0)
        err = np.abs(theta - np.hstack([A, B])).max()
        assert err <= 1e-2
        assert err > 1e-5  # the bias is real, not rounding

    def test_rank_deficiency_names_eigenvalue(self):
        V = np.diag([1.0, 1.0, 0.0])
        acc = make_acc(V, np.zeros((3, 2)))
        with pytest.raises(RankDeficiencyError) as err:
            least_squares(acc, ridge=0.0)
        assert err.value.lambda_min == pytest.approx(0.0, abs=1e-15)
        theta = least_squares(acc, ridge=1e-6)  # ridge path still works
        assert np.all(np.isfinite(theta))

    def test_ridge_continuity(self):
        rng = np.random.default_rng(5)
        Z = rng.standard_normal((500, 4))
        V = Z.T @ Z * 1e-2
        C = rng.standard_normal((4, 2))
        acc = make_acc(V, C, elapsed=5.0)
        base = least_squares(acc, ridge=0.0)
        d6 = np.linalg.norm(least_squares(acc, ridge=1e-6) - base, 2)
        d9 = np.linalg.norm(least_squares(acc, ridge=1e-9) - base, 2)
        assert d6 < 1e-4
        assert d9 < d6

    def test_zero_elapsed_rejected(self):
        acc = EstimatorAccumulators.zero(2, 1)
        with pytest.raises(DimensionError):
            least_squares(acc)


class TestRandomize:
    def test_scale_at_gamma_16(self):
        # 16^(-1/4) = 0.5 exactly.
        rng = np.random.default_rng(0)
        ls = np.zeros((2, 3))
        est = randomize(ls, 16.0, rng)
        rng2 = np.random.default_rng(0)
        np.testing.assert_array_equal(est.perturbation, 0.5 * rng2.standard_normal((2, 3)))

    def test_variance_at_gamma_25(self):
        # Entry variance is 25^(-1/2) = 0.2; check over 1e5 draws.
        rng = np.random.default_rng(99)
        draws = np.stack([randomize(np.zeros((1, 4)), 25.0, rng).perturbation for _ in range(25000)])
        flat = draws.ravel()  # 1e5 samples
        se = 0.2 * np.sqrt(2.0 / flat.size)
        assert abs(flat.var() - 0.2) <= 3.0 * se

    def test_decomposition_audit_is_exact(self):
        rng = np.random.default_rng(4)
        ls = rng.standard_normal((3, 5))
        est = randomize(ls, 30.0, rng, episode_index=7)
        np.testing.assert_array_equal(est.theta, est.ls_part + est.perturbation)
        assert est.episode_index == 7
        assert est.gamma == 30.0

    def test_zero_perturbation_estimate(self):
        ls = np.ones((2, 3))
        est = ParameterEstimate(
            theta=ls, episode_index=0, ls_part=ls, perturbation=np.zeros((2, 3)), gamma=10.0
        )
        np.testing.assert_array_equal(est.theta, ls)

    def test_inconsistent_decomposition_rejected(self):
        with pytest.raises(DimensionError):
            ParameterEstimate(
                theta=np.ones((1, 2)),
                episode_index=0,
                ls_part=np.zeros((1, 2)),
                perturbation=np.zeros((1, 2)),
            )

    def test_nonpositive_gamma_rejected(self):
        with pytest.raises(DimensionError):
            randomize(np.zeros((1, 2)), 0.0, np.random.default_rng(0))


class TestEstimationError:
    def test_exact_estimate_is_zero(self):
        dyn, _ = airplane_model()
        theta = dyn.theta()
        est = ParameterEstimate(
            theta=theta, episode_index=0, ls_part=theta, perturbation=np.zeros_like(theta)
        )
        assert estimation_error(est, dyn) == 0.0

    def test_rank_one_perturbation(self):
        dyn, _ = airplane_model()
        theta = dyn.theta().copy()
        theta[0, 0] += 0.3
        est = ParameterEstimate(
            theta=theta, episode_index=0, ls_part=theta, perturbation=np.zeros_like(theta)
        )
        assert estimation_error(est, dyn) == pytest.approx(0.3, rel=1e-12)

    def test_shape_mismatch(self):
        dyn, _ = airplane_model()
        est = ParameterEstimate(
            theta=np.zeros((2, 3)), episode_index=0,
            ls_part=np.zeros((2, 3)), perturbation=np.zeros((2, 3)),
        )
        with pytest.raises(DimensionError):
            estimation_error(est, dyn)


class TestInitialEstimate:
    def test_stabilizes_the_truth(self):
        dyn, cost = airplane_model()
        rng = np.random.default_rng(17)
        est, redraws = draw_initial_estimate(dyn, cost, rng, std=0.05)
        from ctlqr import optimal_gain

        A_hat, B_hat = est.split(dyn.p)
        K = optimal_gain(A_hat, B_hat, cost.Q, cost.R)
        assert is_hurwitz(dyn.A + dyn.B @ K.K)
        assert redraws >= 0
        assert estimation_error(est, dyn) < 1.0

    def test_reproducible(self):
        dyn, cost = airplane_model()
        a, _ = draw_initial_estimate(dyn, cost, np.random.default_rng(3))
        b, _ = draw_initial_estimate(dyn, cost, np.random.default_rng(3))
        np.testing.assert_array_equal(a.theta, b.theta)
