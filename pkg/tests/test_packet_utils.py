"""
Tests for wave packets and the packet product engine.

Validates:
- sampled packet mass against its closed form
- total mass of a product row against the factorised integral
- the counterexample exponent (1-a)/2 of the basic recipe
"""
import math

import numpy as np
import pytest
from scipy import integrate

from gbolab.utils.errors import ConfigurationError, CoverageError, ResolutionError
from gbolab.utils.packet_utils import (
    InteractionExperiment, ProductEngine, WavePacket, bilinear_sides, build_packets, dyadic_sum,
    interaction_resonance, refined_interaction, sample_packet, smoothed_indicator, sweep,
)
from gbolab.utils.resonance_utils import resonance_fn
from gbolab.utils.spectral_utils import DispersionParams

N_VALUES = (64, 128, 256, 512, 1024)


class TestWavePacket:
    """Smoothed indicator profiles and their sampled mass."""

    def test_indicator_profile(self):
        values = smoothed_indicator(np.array([0.0, 0.5, 1.0]), 0.0, 1.0, 0.1)
        assert values.tolist() == [0.0, 1.0, 0.0]
        sharp = smoothed_indicator(np.array([-0.1, 0.5, 1.1]), 0.0, 1.0, 0.0)
        assert sharp.tolist() == [0.0, 1.0, 0.0]

    @pytest.mark.parametrize("smoothing", [0.0, 0.1, 0.25])
    def test_sampled_mass_matches_closed_form(self, smoothing):
        packet = WavePacket(10.0, 10.5, modulation_width=1.0, smoothing=smoothing)
        sampled = sample_packet(DispersionParams(0.5), packet, 256, 0.005)
        assert sampled.field.fourier_l2_norm() ** 2 == pytest.approx(packet.closed_form_mass(), rel=0.02)

    def test_invalid_packets(self):
        with pytest.raises(ConfigurationError):
            WavePacket(1.0, 1.0)
        with pytest.raises(ConfigurationError):
            WavePacket(0.0, 1.0, smoothing=0.5)

    def test_too_few_samples(self):
        with pytest.raises(ResolutionError) as excinfo:
            sample_packet(DispersionParams(0.5), WavePacket(0.0, 1.0), 4, 0.1)
        assert excinfo.value.required == 8

    def test_unresolvable_in_double_precision(self):
        # representable edges, but 64 samples across one unit at 1e15 fall below the ulp
        with pytest.raises(ResolutionError):
            sample_packet(DispersionParams(0.5), WavePacket(1e15, 1e15 + 1.0), 64, 0.1)

    def test_width_lost_to_rounding(self):
        with pytest.raises(ResolutionError):
            WavePacket.spanning(1e15, 1e-3)
        packet = WavePacket.spanning(8.0, 0.5)
        assert (packet.xi_low, packet.xi_high) == (8.0, 8.5)


class TestInteractionResonance:
    """Cancellation-free Omega for a thin low packet against a high one."""

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_matches_direct_formula(self, a):
        params = DispersionParams(a)
        xi_low = np.array([0.01, 0.3, -0.2, 2.0])
        xi_high = np.array([5.0, 40.0, 7.0, 100.0])
        direct = resonance_fn(params, xi_low, xi_high)
        assert np.allclose(interaction_resonance(params, xi_low, xi_high), direct, rtol=1e-10)


class TestProductEngine:
    """Rows of F(d_x(u1 u2))(xi, mu)."""

    def engine(self, **kwargs):
        low = WavePacket(0.5, 1.0, smoothing=0.1)
        high = WavePacket(8.0, 9.0, smoothing=0.1)
        return ProductEngine(DispersionParams(0.5), low, high, n_rows=16, h_mu=0.02, **kwargs), low, high

    def test_row_mass_factorises(self):
        engine, low, high = self.engine()
        k = 7
        xi = engine.xi[k]
        row_sum = complex(np.sum(engine.row(k)) * engine.h_mu)
        overlap, _ = integrate.quad(lambda t: low.amplitude(t) * high.amplitude(xi - t), 0.5, 1.0, limit=200)
        kernel_mass = (2 * (1 - 0.1)) ** 2
        expected = -1j * xi / (2 * math.pi) ** 2 * kernel_mass * overlap
        assert abs(row_sum - expected) <= 1e-3 * abs(expected)

    def test_weighted_row_shapes(self):
        engine, _, _ = self.engine()
        value, xf, tf = engine.row(3, weighted=True)
        assert value.shape == xf.shape == tf.shape == engine.mu.shape
        assert np.all(np.isfinite(xf)) and np.all(np.isfinite(tf))

    def test_fixed_window_too_small(self):
        with pytest.raises(CoverageError):
            self.engine(mu_halfwidth=1.0)

    def test_modulation_budget(self):
        with pytest.raises(ResolutionError) as excinfo:
            self.engine(max_mu_points=10)
        assert excinfo.value.required > 10

    def test_high_packet_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            ProductEngine(DispersionParams(0.5), WavePacket(0.5, 1.0), WavePacket(-9.0, -8.0), 16, 0.02)


class TestExperiment:
    """Packet recipes and their validation."""

    def test_thin_widths(self):
        basic = InteractionExperiment(a=0.5, n_values=N_VALUES)
        refined = InteractionExperiment(a=0.5, n_values=N_VALUES, recipe='refined')
        assert basic.thin_width(256) == pytest.approx(256 ** -1.5)
        assert refined.thin_width(256) == pytest.approx(256 ** -0.25)

    def test_build_packets_supports(self):
        experiment = InteractionExperiment(a=0.0, n_values=N_VALUES)
        u1, u2 = build_packets(experiment, 64)
        assert u1.packet.xi_low == pytest.approx(1 / 128)
        assert u2.packet.xi_low == 64.0
        assert u2.packet.xi_high == pytest.approx(64 + 1 / 64)

    @pytest.mark.parametrize("kwargs", [{'recipe': 'other'}, {'n_values': ()}, {'alpha_constant': 0.0},
                                        {'layer_fraction': 0.0}, {'output_rows': 4}])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            InteractionExperiment(a=0.5, **kwargs)

    def test_refined_interaction_needs_refined_recipe(self):
        with pytest.raises(ConfigurationError):
            refined_interaction(InteractionExperiment(a=0.5), 64)

    def test_dyadic_sum(self):
        assert dyadic_sum(0.5, 3) == pytest.approx(4.0)
        assert dyadic_sum(0.0, 1) == pytest.approx(1 + math.sqrt(2))


class TestCounterexample:
    """lhs / rhs of the bilinear estimate grows like N^{(1-a)/2} on the basic packet pair."""

    def test_sides_are_positive(self):
        sides = bilinear_sides(InteractionExperiment(a=0.5, n_values=N_VALUES), 128)
        assert sides.lhs > 0 and sides.rhs_terms[0] > 0
        assert 0.9 <= sides.box_fraction <= 1.0
        record = sides.to_record()
        assert record['rhs2'] is None and record['ratio'] == pytest.approx(sides.ratio)
        assert record['box_fraction'] == sides.box_fraction

    @pytest.mark.parametrize("a", [0.0, 1.0])
    def test_product_mass_sits_in_the_predicted_box(self, a):
        for n in (64, 512):
            assert bilinear_sides(InteractionExperiment(a=a, n_values=N_VALUES), n).box_fraction >= 0.9

    @pytest.mark.slow
    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_ratio_exponent(self, a):
        report = sweep(InteractionExperiment(a=a, n_values=N_VALUES + (2048, 4096)))
        slope = report.fits['ratio_exponent'].slope
        assert abs(slope - (1 - a) / 2) <= 0.05, f"a={a}: fitted slope {slope:.3f}"

    @pytest.mark.slow
    def test_refined_grows_logarithmically_at_zero(self):
        report = sweep(InteractionExperiment(a=0.0, n_values=N_VALUES, recipe='refined'))
        growth = report.fits['ratio_log_growth']
        assert growth.slope > 0 and growth.r2 > 0.95, growth.to_record()

    @pytest.mark.slow
    def test_refined_decays_at_half(self):
        report = sweep(InteractionExperiment(a=0.5, n_values=N_VALUES, recipe='refined'))
        corrected = report.fits['log_corrected_exponent'].slope
        assert corrected <= -0.4, corrected
