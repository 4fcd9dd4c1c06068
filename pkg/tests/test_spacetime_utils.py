"""Tests for space-time fields, the (xi, lambda) transform and windowed linear flows."""
import math

import numpy as np
import pytest
from scipy import integrate

from gbolab.utils.dyadic_utils import bump
from gbolab.utils.errors import ConfigurationError, CoverageError
from gbolab.utils.spacetime_utils import ModulationField, SpacetimeField, TimeGrid, windowed_linear_flow
from gbolab.utils.spectral_utils import DispersionParams, SpatialGrid, SpectralField


def single_mode(n=8, k=1):
    grid = SpatialGrid(n, 2 * math.pi)
    coeffs = np.zeros(n, dtype=complex)
    coeffs[k] = 1.0
    return SpectralField(grid, coeffs)


def bump_transform(lam):
    """int psi(t) e^{-it lambda} dt for the even bump"""
    value, _ = integrate.quad(lambda t: bump(t) * math.cos(lam * t), 0.0, 1.0, points=[0.5], limit=200)
    return 2.0 * value


class TestTimeGrid:
    """Sample and dual-frequency spacing."""

    def test_spacings(self):
        grid = TimeGrid(64, 8.0)
        assert grid.dt == pytest.approx(0.125)
        assert grid.d_lambda == pytest.approx(math.pi / 4)
        assert grid.lambda_max == pytest.approx(8 * math.pi)
        assert grid.wrapped_t.min() == pytest.approx(-4.0)

    def test_invalid_sizes(self):
        with pytest.raises(ConfigurationError):
            TimeGrid(63, 1.0)
        with pytest.raises(ConfigurationError):
            TimeGrid(64, 0.0)


class TestWindowedLinearFlow:
    """F(psi(t/tau) W(t) u0)(xi, lambda) = tau psi^(tau (lambda - omega(xi))) u0^(xi)."""

    @pytest.mark.parametrize("tau", [1.0, 2.0])
    def test_closed_form(self, tau):
        params = DispersionParams(0.5)
        u0 = single_mode()
        time_grid = TimeGrid(512, 16.0)
        u = windowed_linear_flow(params, u0, time_grid, tau)
        lam = time_grid.frequencies
        # away from the window edge, where aliased copies of the transform are negligible
        inner = np.abs(lam) <= time_grid.lambda_max / 2
        expected = np.array([tau * bump_transform(tau * (value - 1.0)) for value in lam[inner]])
        assert np.max(np.abs(u.coeffs[1][inner] - expected)) < 1e-5
        assert np.max(np.abs(u.coeffs[2:])) == 0.0

    def test_peak_on_dispersive_surface(self):
        params = DispersionParams(1.0)
        u0 = single_mode(k=2)
        time_grid = TimeGrid(1024, 64.0)
        u = windowed_linear_flow(params, u0, time_grid, 8.0)
        peak = time_grid.frequencies[int(np.argmax(np.abs(u.coeffs[2])))]
        assert peak == pytest.approx(8.0, abs=time_grid.d_lambda)

    def test_real_data_with_nyquist_content_stays_real(self):
        grid = SpatialGrid(64, 8 * math.pi)
        u0 = SpectralField.from_samples(grid, 0.05 * np.exp(-grid.wrapped_x ** 2))
        assert u0.coeffs[grid.nyquist_index] != 0.0
        u = windowed_linear_flow(DispersionParams(0.5), u0, TimeGrid(1024, 1.0), 0.25)
        assert u.is_real()
        assert np.max(np.abs(u.samples().imag)) < 1e-12 * np.max(np.abs(u.samples()))


class TestSpacetimeField:
    """Transform consistency, Parseval and coverage."""

    def test_samples_round_trip_and_parseval(self):
        xi_grid = SpatialGrid(16, 2 * math.pi)
        time_grid = TimeGrid(32, 4.0)
        rng = np.random.default_rng(0)
        samples = rng.normal(size=(16, 32))
        u = SpacetimeField.from_samples(xi_grid, time_grid, samples)
        assert np.allclose(u.samples().real, samples, atol=1e-12)
        assert u.is_real()
        assert u.fourier_l2_norm() == pytest.approx(2 * math.pi * u.physical_l2_norm(), rel=1e-12)

    def test_arithmetic(self):
        params = DispersionParams(0.5)
        u = windowed_linear_flow(params, single_mode(), TimeGrid(64, 8.0), 1.0)
        doubled = u + u
        assert np.allclose(doubled.coeffs, (2 * u).coeffs)
        assert np.max(np.abs((doubled - u - u).coeffs)) == 0.0

    def test_coverage_error_on_coarse_time_grid(self):
        params = DispersionParams(1.0)
        u0 = single_mode(n=32, k=10)
        u = windowed_linear_flow(params, u0, TimeGrid(64, 8.0), 1.0)
        with pytest.raises(CoverageError):
            u.check_coverage(params)

    def test_modulation_field_needs_two_points(self):
        with pytest.raises(ConfigurationError):
            ModulationField([0.0], [0.0, 1.0], np.zeros((1, 2)))
