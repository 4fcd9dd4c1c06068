"""
Tests for the dispersive norms.

Validates:
- the layer inequality ||u||_{L^2} <= ||u||_{X^0_0}
- exact duality between X^{-1/2}_s and the C norm at -s
- F^s of a Gaussian against quadrature of its closed-form transforms
- weight resolution and degenerate inputs
- single-layer exactness, seminorm axioms and translation invariance of X
- L^4 quadrature and the delta-stable constant of the windowed flow
"""
import math

import numpy as np
import pytest
from scipy import integrate

from gbolab.utils.bourgain_utils import (
    f_norm_report, lebesgue_l4, norm_Cdual, norm_F, norm_tildeX, norm_X, norm_X_l2, norm_Y, pairing,
    strichartz_ratio, t_weighted, x_weighted, z_norm_report,
)
from gbolab.utils.errors import DegenerateInputError, WeightUnresolvableError
from gbolab.utils.spacetime_utils import SpacetimeField, TimeGrid, time_cutoff, windowed_linear_flow
from gbolab.utils.spectral_utils import DispersionParams, SpatialGrid, SpectralField

PARAMS = DispersionParams(0.5)


def gaussian(n=32, length=8 * math.pi):
    grid = SpatialGrid(n, length)
    return SpectralField.from_samples(grid, np.exp(-grid.wrapped_x ** 2))


def random_field(rng, n_x=16, n_t=256):
    xi_grid = SpatialGrid(n_x, 2 * math.pi)
    return SpacetimeField.from_samples(xi_grid, TimeGrid(n_t, 8.0), rng.normal(size=(n_x, n_t)))


def near_surface(params, xi_grid, time_grid, width, seed=0):
    """Random coefficients on |lambda - omega(xi)| <= width, zero elsewhere"""
    z = SpacetimeField(xi_grid, time_grid, np.zeros((xi_grid.n_points, time_grid.n_points))).modulation(params)
    rng = np.random.default_rng(seed)
    coeffs = (rng.normal(size=z.shape) + 1j * rng.normal(size=z.shape)) * (np.abs(z) <= width)
    return SpacetimeField(xi_grid, time_grid, coeffs)


@pytest.fixture
def flow():
    return windowed_linear_flow(PARAMS, gaussian(), TimeGrid(256, 16.0), 1.0)


class TestXNorms:
    """Layer sums and their orderings."""

    def test_l2_below_x00(self, flow):
        assert flow.fourier_l2_norm() <= norm_X(PARAMS, flow, 0.0, 0.0) * (1 + 1e-12)

    def test_square_summed_variant_is_smaller(self, flow):
        assert norm_X_l2(PARAMS, flow, 0.75, 0.5) <= norm_X(PARAMS, flow, 0.75, 0.5) * (1 + 1e-12)

    def test_monotone_in_b_and_s(self, flow):
        assert norm_X(PARAMS, flow, 0.0, 0.3) <= norm_X(PARAMS, flow, 0.0, 0.6)
        assert norm_X(PARAMS, flow, 0.0, 0.5) <= norm_X(PARAMS, flow, 1.0, 0.5)

    def test_tilde_x_at_zero_is_l2(self, flow):
        assert norm_tildeX(PARAMS, flow, 0.0, 0.0) == pytest.approx(flow.fourier_l2_norm(), rel=1e-12)

    def test_z_report_components(self, flow):
        report = z_norm_report(PARAMS, flow, 0.75, 0.5)
        parts = report.components
        assert report.value == pytest.approx(parts['X'] + parts['Y_x'] + parts['Y_t'])

    def test_y_norm_accepts_closed_form_weights(self, flow):
        weights = (x_weighted(flow), t_weighted(flow))
        assert norm_Y(PARAMS, flow, -0.75, 0.75, 0.5, weighted=weights) == pytest.approx(
            norm_Y(PARAMS, flow, -0.75, 0.75, 0.5))


class TestDuality:
    """|<u, g>| <= ||u||_{X^{-1/2}_s} ||g||_{C, -s}."""

    @pytest.mark.parametrize("seed", range(5))
    def test_pairing_bound(self, seed):
        rng = np.random.default_rng(seed)
        params = DispersionParams(0.0)
        u, g = random_field(rng), random_field(rng)
        bound = norm_X(params, u, 0.3, -0.5) * norm_Cdual(params, g, -0.3)
        assert abs(pairing(u, g)) <= bound * (1 + 1e-12)


class TestWeightedNorms:
    """F^s = H^s + weighted H^{s - 2 s*}."""

    def test_gaussian_f_norm(self):
        s = PARAMS.s_star
        u0 = gaussian(n=1 << 16, length=2 * math.pi * 1024)

        def sobolev(index, profile):
            value, _ = integrate.quad(lambda xi: 2 * (1 + xi) ** (2 * index) * profile(xi) ** 2, 0, 40, limit=200)
            return math.sqrt(value)

        h_s = sobolev(s, lambda xi: math.sqrt(math.pi) * math.exp(-xi ** 2 / 4))
        weighted = sobolev(s - 2 * s, lambda xi: math.sqrt(math.pi) * xi / 2 * math.exp(-xi ** 2 / 4))
        report = f_norm_report(PARAMS, u0, s)
        assert norm_F(PARAMS, u0, s) == report.value
        assert report.components['h_s'] == pytest.approx(h_s, rel=1e-6)
        assert report.components['weighted'] == pytest.approx(weighted, rel=1e-6)

    def test_mass_at_the_window_edge_is_rejected(self):
        u = windowed_linear_flow(PARAMS, gaussian(), TimeGrid(64, 8.0), 8.0)
        with pytest.raises(WeightUnresolvableError):
            t_weighted(u)

    def test_wide_data_rejected_by_x_weight(self):
        grid = SpatialGrid(64, 2 * math.pi)
        with pytest.raises(WeightUnresolvableError):
            x_weighted(SpectralField.from_samples(grid, np.ones(64)))


class TestStrichartz:
    """L^4 against X^{b0}_0."""

    def test_ratio_positive_and_finite(self, flow):
        ratio = strichartz_ratio(PARAMS, flow)
        assert 0 < ratio < np.inf
        assert lebesgue_l4(flow) > 0

    def test_zero_field_is_degenerate(self, flow):
        with pytest.raises(DegenerateInputError):
            strichartz_ratio(PARAMS, flow * 0.0)


class TestSingleLayer:
    """Fields within |lambda - omega| <= 1 live in layer 0 only."""

    def test_x_norm_is_b_independent_and_exact(self):
        xi_grid, time_grid = SpatialGrid(16, 2 * math.pi), TimeGrid(512, 8.0)
        u = near_surface(PARAMS, xi_grid, time_grid, 0.9)
        s = PARAMS.s_star
        weight = ((1.0 + np.abs(u.xi)) ** (2 * s))[:, None]
        exact = math.sqrt(u.cell_area * float(np.sum(weight * np.abs(u.coeffs) ** 2)))
        for b in (-0.5, 0.0, 0.3, 0.9):
            assert norm_X(PARAMS, u, s, b) == pytest.approx(exact, rel=1e-12)
        assert norm_Cdual(PARAMS, u, s) == pytest.approx(exact, rel=1e-12)

    def test_tilde_x_within_five_percent(self):
        xi_grid, time_grid = SpatialGrid(16, 2 * math.pi), TimeGrid(512, 8.0)
        u = near_surface(PARAMS, xi_grid, time_grid, 0.25, seed=1)
        for b in (0.1, 0.2):
            ratio = norm_tildeX(PARAMS, u, 0.5, b) / norm_X(PARAMS, u, 0.5, b)
            assert 1.0 <= ratio <= 1.05, (b, ratio)

    def test_surface_field_has_equal_norms(self):
        params = DispersionParams(1.0)
        xi_grid, time_grid = SpatialGrid(8, 2 * math.pi), TimeGrid(256, 2 * math.pi)
        u = near_surface(params, xi_grid, time_grid, 1e-9, seed=2)
        assert np.count_nonzero(u.coeffs) == 8
        assert norm_tildeX(params, u, 0.25, 0.75) == pytest.approx(norm_X(params, u, 0.25, 0.75), rel=1e-12)


class TestSeminormAxioms:
    """Homogeneity and the triangle inequality on random fields."""

    NORMS = {
        'X': lambda p, u: norm_X(p, u, 0.3, 0.5),
        'tildeX': lambda p, u: norm_tildeX(p, u, 0.3, 0.5),
        'Cdual': lambda p, u: norm_Cdual(p, u, -0.3),
    }

    @pytest.mark.parametrize("name", sorted(NORMS))
    @pytest.mark.parametrize("seed", range(3))
    def test_homogeneity_and_triangle(self, name, seed):
        params = DispersionParams(0.0)
        norm = self.NORMS[name]
        rng = np.random.default_rng(seed)
        u, v = random_field(rng), random_field(rng)
        assert norm(params, u * -2.5) == pytest.approx(2.5 * norm(params, u), rel=1e-12)
        assert norm(params, u + v) <= (norm(params, u) + norm(params, v)) * (1 + 1e-12)

    def test_dual_below_half_x(self, flow):
        assert norm_Cdual(PARAMS, flow, 0.2) <= norm_X(PARAMS, flow, 0.2, 0.5) * (1 + 1e-12)


class TestTranslation:
    """A spatial shift leaves X unchanged and moves the x-weighted part of Y."""

    def test_x_invariant_y_grows(self, flow):
        # four cells of 8 pi / 32, so the shift is exact on the grid
        u0 = gaussian()
        shifted_data = SpectralField.from_samples(u0.grid, np.roll(u0.real_samples(), 4))
        shifted = windowed_linear_flow(PARAMS, shifted_data, TimeGrid(256, 16.0), 1.0)
        s = PARAMS.s_star
        assert norm_X(PARAMS, shifted, s, 0.5) == pytest.approx(norm_X(PARAMS, flow, s, 0.5), rel=1e-8)
        before = z_norm_report(PARAMS, flow, s, 0.5).components
        after = z_norm_report(PARAMS, shifted, s, 0.5).components
        assert after['Y_x'] > 2 * before['Y_x']
        assert after['Y_t'] == pytest.approx(before['Y_t'], rel=1e-8)


class TestLebesgueQuadrature:
    """L^4 of psi(t/tau) W(t) u0 against samples built directly from the phases."""

    def test_matches_direct_samples(self, flow):
        u0 = gaussian()
        time_grid = flow.time_grid
        t = time_grid.wrapped_t
        xi = u0.grid.frequencies.copy()
        rate = xi * np.abs(xi) ** 1.5
        rate[u0.grid.nyquist_index] = 0.0
        profile = u0.coeffs[:, None] * np.exp(1j * rate[:, None] * t[None, :]) * time_cutoff(t, 1.0)[None, :]
        samples = np.fft.fft(profile, axis=0) / u0.grid.length
        expected = (u0.grid.dx * time_grid.dt * np.sum(np.abs(samples) ** 4)) ** 0.25
        assert lebesgue_l4(flow) == pytest.approx(expected, rel=1e-10)
        assert strichartz_ratio(PARAMS, flow) == pytest.approx(expected / norm_X(PARAMS, flow, 0.0, PARAMS.b0))


class TestCutoffStability:
    """||psi(t/delta) W(t) u0||_{X^{1/2}_s} / ||u0||_{H^s} stays bounded over dyadic delta."""

    def test_constant_is_stable(self):
        u0 = gaussian()
        s = PARAMS.s_star
        time_grid = TimeGrid(8192, 8.0)
        constants = [norm_X(PARAMS, windowed_linear_flow(PARAMS, u0, time_grid, 2.0 ** -k), s, 0.5)
                     / u0.sobolev_norm(s) for k in range(7)]
        assert max(constants) / min(constants) < 2.0, constants
