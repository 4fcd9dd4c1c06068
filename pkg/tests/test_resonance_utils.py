"""Tests for the resonance function and the frequency-interaction constants."""
import numpy as np
import pytest

from gbolab.utils.resonance_utils import (
    FrequencyPair, admissible_b, brute_force_constants, jacobian, jacobian_constant,
    levelset_derivative_constant, levelset_measure, lower_bound_check, resonance_fn, same_sign_profile,
    sample_region,
)
from gbolab.utils.spectral_utils import DispersionParams


class TestResonanceFunction:
    """Omega = omega(xi1 + xi2) - omega(xi1) - omega(xi2)."""

    def test_worked_values(self):
        assert resonance_fn(DispersionParams(1.0), 1.0, 1.0) == pytest.approx(6.0)
        assert resonance_fn(DispersionParams(0.0), 1.0, 0.25) == pytest.approx(0.5)
        assert resonance_fn(DispersionParams(0.5), 3.0, 0.0) == 0.0

    def test_cubic_closed_form_at_a_one(self):
        params = DispersionParams(1.0)
        grid = np.linspace(0.0, 10.0, 101)
        xi1, xi2 = np.meshgrid(grid, grid)
        exact = 3 * xi1 * xi2 * (xi1 + xi2)
        gap = np.abs(resonance_fn(params, xi1, xi2) - exact) / np.maximum(1.0, exact)
        assert gap.max() < 1e-12
        gap = np.abs(resonance_fn(params, -xi1, -xi2) + exact) / np.maximum(1.0, exact)
        assert gap.max() < 1e-12

    def test_symmetric_and_odd(self):
        params = DispersionParams(0.3)
        rng = np.random.default_rng(1)
        xi1, xi2 = rng.normal(size=(2, 1000)) * 50
        big_omega = resonance_fn(params, xi1, xi2)
        scale = 1.0 + np.abs(xi1) ** 2.3 + np.abs(xi2) ** 2.3 + np.abs(xi1 + xi2) ** 2.3
        assert np.max(np.abs(resonance_fn(params, xi2, xi1) - big_omega) / scale) < 1e-12
        assert np.array_equal(resonance_fn(params, -xi1, -xi2), -big_omega)


class TestFrequencyPair:
    """Region tags with closed comparisons at 1/4 and 1."""

    @pytest.mark.parametrize("xi2, tag", [(0.25, 'comparable'), (1.0, 'comparable'), (-0.5, 'comparable'),
                                          (0.2, 'low'), (1.5, 'high')])
    def test_comparability(self, xi2, tag):
        assert FrequencyPair(1.0, xi2).comparability == tag

    def test_sign_pattern(self):
        assert FrequencyPair(1.0, 2.0).sign_pattern == 'same'
        assert FrequencyPair(1.0, -2.0).sign_pattern == 'opposite'
        assert FrequencyPair(0.0, 2.0).sign_pattern == 'zero'


class TestLowerBounds:
    """|Omega| >= c |xi1|^{2+a} (same sign) and c |xi1|^{1+a} |xi1 + xi2| (opposite sign)."""

    def test_same_sign_profile_endpoint(self):
        assert same_sign_profile(DispersionParams(0.0), 0.25) == pytest.approx(0.5)

    def test_same_sign_constant_at_least_profile_minimum(self):
        params = DispersionParams(0.0)
        xi1 = np.array([1.0, 4.0, -2.0])
        report = lower_bound_check(params, xi1, 0.25 * xi1)
        assert report.c_same_sign >= 0.5 - 1e-12

    @pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_no_violations_on_random_samples(self, a):
        params = DispersionParams(a)
        xi1, xi2 = sample_region(np.random.default_rng(0), 100_000, 1e3)
        report = lower_bound_check(params, xi1, xi2)
        assert report.violations == []
        assert report.rejected == []
        c_same, c_opposite = brute_force_constants(params)
        assert report.c_same_sign >= c_same
        assert report.c_opposite_sign >= c_opposite

    def test_degenerate_opposite_ray_is_skipped(self):
        params = DispersionParams(0.5)
        report = lower_bound_check(params, [2.0], [-2.0])
        assert report.violations == []
        assert report.n_samples == 1

    def test_samples_outside_region_are_tagged(self):
        report = lower_bound_check(DispersionParams(0.5), [1.0, 1.0], [0.1, 3.0])
        assert [tag for *_, tag in report.rejected] == ['low', 'high']
        assert report.n_samples == 0

    def test_report_records(self):
        report = lower_bound_check(DispersionParams(0.5), [1.0, 1.0], [0.5, -0.5])
        records = report.to_records()
        assert [r['branch'] for r in records] == ['same_sign', 'opposite_sign']
        assert all(r['n_samples'] == 2 for r in records)


class TestJacobian:
    """|J| = |omega'(xi1) - omega'(xi2)|."""

    def test_values(self):
        params = DispersionParams(1.0)
        assert jacobian(params, 2.0, 1.0) == pytest.approx(9.0)
        assert jacobian(params, 1.5, 1.5) == 0.0

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_bounded_below_in_low_region(self, a):
        params = DispersionParams(a)
        kappa = jacobian_constant(params)
        assert kappa > 0
        xi1 = 37.0
        xi2 = np.linspace(-xi1 / 4, xi1 / 4, 501)
        assert np.all(jacobian(params, xi1, xi2) >= kappa * xi1 ** (1 + a) * (1 - 1e-9))


class TestLevelSet:
    """|Delta_{xi2}| against 2^j 2^{-m1 (1+a)}."""

    def test_random_thetas_respect_bound(self):
        params = DispersionParams(0.5)
        rng = np.random.default_rng(3)
        xi1, m1, j = 256.0, 8, 3
        for theta1, theta2 in rng.uniform(-16, 16, size=(100, 2)):
            report = levelset_measure(params, xi1, theta1, theta2, j, m1)
            assert report.measured <= 4 * report.bound

    def test_huge_layer_is_out_of_regime(self):
        report = levelset_measure(DispersionParams(0.5), 64.0, 0.0, 0.0, 60, 6)
        assert report.measured <= report.interval_length
        assert report.out_of_regime

    def test_empty_window_measures_zero(self):
        report = levelset_measure(DispersionParams(0.5), 64.0, 1e9, 0.0, 2, 6)
        assert report.measured == 0.0

    def test_derivative_constant_positive(self):
        assert levelset_derivative_constant(DispersionParams(0.5), 64.0) > 0


class TestAdmissibleB:
    """(max(b0, (1-a)/(2(1+a))), 1/2)."""

    def test_empty_at_zero(self):
        assert admissible_b(DispersionParams(0.0)).empty

    def test_half(self):
        interval = admissible_b(DispersionParams(0.5))
        assert abs(interval.lower - 0.35) < 1e-12
        assert abs(interval.upper - 0.5) < 1e-12
        assert interval.contains(0.4) and not interval.contains(0.35)

    def test_one(self):
        interval = admissible_b(DispersionParams(1.0))
        assert abs(interval.lower - 1 / 3) < 1e-12

    @pytest.mark.parametrize("a", np.linspace(0.01, 0.99, 25))
    def test_nonempty_inside(self, a):
        assert not admissible_b(DispersionParams(float(a))).empty
