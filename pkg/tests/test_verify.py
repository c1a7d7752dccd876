import math

import numpy as np
import pytest

from nndist import (
    AscentConfig,
    ConstraintSet,
    NetworkSpec,
    activation_profile,
    bounded_difference_check,
    concentration_tailcheck,
    finite_support_spec,
    gaussian_spec,
    grid_supremum,
    mc_rademacher,
    mgf_check,
    rademacher_bound,
    rate_experiment,
    sample,
    spectral_norm_power,
)
from nndist.errors import DegenerateFitError, ValidationError

RELU1 = NetworkSpec(2, (1,), (activation_profile("relu"),))
UNIT_CS = ConstraintSet("frobenius", (1.0, 1.0))


class TestMCRademacher:
    def test_single_point_distribution_oracle(self):
        # one sample at a unit-norm point: the supremum is |f(p)| = 1 for
        # every sign, so the complexity is exactly 1 (up to grid error)
        p = np.array([0.6, 0.8])
        dist = finite_support_spec([p], [1.0], gamma=1.0)
        result = mc_rademacher(dist, RELU1, UNIT_CS, n=1, trials=50, seed=5)
        assert abs(result.mean - 1.0) <= 0.05
        assert result.std_error <= 1e-6

    def test_identical_seed_identical_result(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        a = mc_rademacher(dist, RELU1, UNIT_CS, n=10, trials=20, seed=3, keep_values=True)
        b = mc_rademacher(dist, RELU1, UNIT_CS, n=10, trials=20, seed=3, keep_values=True)
        assert a == b

    def test_mean_below_closed_form_bound(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        result = mc_rademacher(dist, RELU1, UNIT_CS, n=50, trials=100, seed=7)
        bound = rademacher_bound(1.0, 50, 2, UNIT_CS, RELU1.activations)
        assert result.mean <= bound.total + 3.0 * result.std_error

    def test_ascent_mode_on_wider_net(self):
        spec = NetworkSpec(2, (3,), (activation_profile("relu"),))
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        cfg = AscentConfig(restarts=2, steps=80)
        result = mc_rademacher(dist, spec, UNIT_CS, n=10, trials=10, cfg=cfg, seed=1)
        assert result.mean > 0.0

    def test_validation(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        with pytest.raises(ValidationError):
            mc_rademacher(dist, RELU1, UNIT_CS, n=5, trials=1, seed=0)
        wide = NetworkSpec(2, (3,), (activation_profile("relu"),))
        with pytest.raises(ValidationError):
            mc_rademacher(dist, wide, UNIT_CS, n=5, trials=5, seed=0, mode="brute_force")


class TestConcentrationTailcheck:
    def _dists(self):
        d = gaussian_spec(np.zeros(1), 1.0, 1.0)
        return d, d

    def _spec(self):
        return NetworkSpec(1, (1,), (activation_profile("relu"),))

    def test_bound_arithmetic(self):
        check = concentration_tailcheck(
            self._dists(), self._spec(), UNIT_CS, 100, 100, 150, [0.0, 1.0], seed=2
        )
        np.testing.assert_allclose(check.bounds[0], 1.0)
        np.testing.assert_allclose(check.bounds[1], math.exp(-6.25), rtol=1e-12)
        np.testing.assert_allclose(check.bounds[1], 0.00193045413623, atol=1e-12)

    def test_zero_epsilon_frequency_near_half(self):
        check = concentration_tailcheck(
            self._dists(), self._spec(), UNIT_CS, 100, 100, 400, [0.0], seed=3
        )
        assert check.empirical_freq[0] <= 1.0
        assert 0.3 <= check.empirical_freq[0] <= 0.7

    def test_validity_flags(self):
        check = concentration_tailcheck(
            self._dists(), self._spec(), UNIT_CS, 100, 100, 150, [0.1, 3.0, 4.0], seed=4
        )
        eps_max = math.sqrt(3.0) * 1 * 1 * 1 * 100 * 0.02
        assert check.valid == (True, eps_max >= 3.0, eps_max >= 4.0) == (True, True, False)

    def test_small_trials_warns(self):
        with pytest.warns(RuntimeWarning):
            concentration_tailcheck(
                self._dists(), self._spec(), UNIT_CS, 20, 20, 10, [0.5], seed=5
            )

    def test_accepts_quadruple_input(self):
        from nndist import lecam_gaussian_quadruple

        quad = lecam_gaussian_quadruple(1.0, 32, 32, 2)
        spec = NetworkSpec(2, (1,), (activation_profile("relu"),))
        check = concentration_tailcheck(quad, spec, UNIT_CS, 32, 32, 120, [0.0, 0.2], seed=9)
        assert check.bounds[0] == 1.0 and check.trials == 120

    def test_empirical_below_bound(self):
        check = concentration_tailcheck(
            self._dists(), self._spec(), UNIT_CS, 100, 100, 400, [0.05, 0.1, 0.2, 0.5], seed=6
        )
        for freq, bound in zip(check.empirical_freq, check.bounds):
            assert freq <= bound + 3.0 * math.sqrt(bound / check.trials)


class TestMGF:
    def test_spot_value_chi_square(self):
        dist = gaussian_spec(np.zeros(1), 1.0, 1.0)
        empirical, bound = mgf_check(dist, np.eye(1), 0.25, trials=100000, seed=3)
        np.testing.assert_allclose(bound, math.exp(0.375), rtol=1e-12)
        # exact MGF of a chi-square at 0.25 is sqrt(2), below the bound
        assert math.sqrt(2.0) <= bound
        assert abs(empirical - math.sqrt(2.0)) < 0.05
        assert empirical <= 1.05 * bound

    def test_eta_zero(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        empirical, bound = mgf_check(dist, np.eye(2), 0.0, trials=100, seed=1)
        assert (empirical, bound) == (1.0, 1.0)

    def test_zero_matrix(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        empirical, bound = mgf_check(dist, np.zeros((2, 2)), 0.7, trials=100, seed=1)
        assert (empirical, bound) == (1.0, 1.0)

    def test_inadmissible_eta(self):
        dist = gaussian_spec(np.zeros(1), 1.0, 1.0)
        with pytest.raises(ValidationError):
            mgf_check(dist, np.eye(1), 0.5, trials=10, seed=0)

    def test_eta_grid_dominated(self):
        dist = gaussian_spec(np.array([0.3, -0.2]), 0.64, 1.0)
        a_matrix = np.array([[1.0, 0.3], [0.0, 0.7]])
        snorm = spectral_norm_power(a_matrix.T @ a_matrix)
        cap = 1.0 / (2.0 * dist.tau2 * snorm)
        for frac in np.linspace(0.1, 0.9, 5):
            empirical, bound = mgf_check(dist, a_matrix, frac * cap, trials=200000, seed=8)
            assert empirical <= 1.05 * bound

    def test_power_iteration_matches_eigh(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            a = rng.standard_normal((4, 4))
            sigma = a.T @ a
            np.testing.assert_allclose(
                spectral_norm_power(sigma), np.linalg.eigvalsh(sigma)[-1], rtol=1e-9
            )


class TestBoundedDifference:
    def test_ratio_within_lipschitz_ceiling(self):
        worst = bounded_difference_check(RELU1, UNIT_CS, n_samples=40, n_perturb=200, seed=1)
        assert 0.0 < worst <= 1.0 + 0.02

    def test_ceiling_scales_with_radius(self):
        cs = ConstraintSet("frobenius", (2.0, 1.0))
        worst = bounded_difference_check(RELU1, cs, n_samples=40, n_perturb=200, seed=1)
        assert worst <= 2.0 * (1.0 + 0.02)

    def test_requires_oracle_architecture(self):
        wide = NetworkSpec(2, (3,), (activation_profile("relu"),))
        with pytest.raises(ValidationError):
            bounded_difference_check(wide, UNIT_CS, 10, 5, seed=0)


class TestRateExperiment:
    @staticmethod
    def _pair_builder(dist):
        from nndist.distributions import derive_seed

        def build(n, rep_seed):
            return (
                sample(dist, n, derive_seed(rep_seed, 0)),
                sample(dist, n, derive_seed(rep_seed, 1)),
            )

        return build

    def test_smoke_slope_with_oracle_estimator(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)

        def oracle(xs, ys, _seed):
            zs = np.vstack([xs.data, ys.data])
            w = np.concatenate([np.full(xs.n, 1 / xs.n), np.full(ys.n, -1 / ys.n)])
            return grid_supremum(zs, w, RELU1, UNIT_CS)

        result = rate_experiment(
            self._pair_builder(dist), RELU1, UNIT_CS, [16, 32, 64, 128, 256], reps=8,
            seed=3, estimate_fn=oracle,
        )
        assert -0.75 <= result.slope <= -0.25

    def test_scaling_shifts_intercept_not_slope(self):
        base = gaussian_spec(np.zeros(2), 1.0, 1.0)
        scaled = gaussian_spec(np.zeros(2), 4.0, 2.0)

        def oracle(xs, ys, _seed):
            zs = np.vstack([xs.data, ys.data])
            w = np.concatenate([np.full(xs.n, 1 / xs.n), np.full(ys.n, -1 / ys.n)])
            return grid_supremum(zs, w, RELU1, UNIT_CS)

        grid, reps = [16, 32, 64, 128], 6
        a = rate_experiment(self._pair_builder(base), RELU1, UNIT_CS, grid, reps, seed=4, estimate_fn=oracle)
        b = rate_experiment(self._pair_builder(scaled), RELU1, UNIT_CS, grid, reps, seed=4, estimate_fn=oracle)
        # doubling the scale doubles every estimate exactly (homogeneity),
        # shifting the intercept by log 2 and leaving the slope untouched
        np.testing.assert_allclose(b.slope, a.slope, rtol=0, atol=1e-12)
        np.testing.assert_allclose(b.intercept - a.intercept, math.log(2.0), rtol=0, atol=1e-12)

    def test_zero_estimator_degenerate(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        with pytest.raises(DegenerateFitError):
            rate_experiment(
                self._pair_builder(dist), RELU1, UNIT_CS, [16, 32, 64, 128], reps=5,
                seed=0, estimate_fn=lambda xs, ys, s: 0.0,
            )

    def test_grid_validation(self):
        dist = gaussian_spec(np.zeros(2), 1.0, 1.0)
        with pytest.raises(ValidationError):
            rate_experiment(self._pair_builder(dist), RELU1, UNIT_CS, [16, 32, 64], reps=5, seed=0)
        with pytest.raises(ValidationError):
            rate_experiment(self._pair_builder(dist), RELU1, UNIT_CS, [16, 16, 32, 64], reps=5, seed=0)
        with pytest.raises(ValidationError):
            rate_experiment(self._pair_builder(dist), RELU1, UNIT_CS, [16, 32, 64, 128], reps=2, seed=0)
