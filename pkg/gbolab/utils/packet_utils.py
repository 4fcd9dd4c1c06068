"""Wave packets near the dispersive surface and the bilinear estimates evaluated on them.

A packet is u^(xi, lambda) = A(xi) B(lambda - omega(xi)) with A, B smoothed indicators.
Packets at frequency N are stored on local (xi, mu) grids, mu = lambda - omega(xi). The
product of two packets is

    F(u1 u2)(xi, mu) = (2 pi)^{-2} int A1(xi1) A2(xi - xi1) K(mu + Omega(xi1, xi - xi1)) d xi1

with K = B1 * B2. Each output row deposits the weights A1 A2 at mu = -Omega and convolves
the deposit with K, so N only enters through where the deposits land.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from gbolab.utils.bourgain_utils import norm_X
from gbolab.utils.dyadic_utils import DyadicDecomposition
from gbolab.utils.errors import ConfigurationError, CoverageError, ResolutionError
from gbolab.utils.fit_utils import fit_exponent, fit_log_growth
from gbolab.utils.spacetime_utils import ModulationField
from gbolab.utils.spectral_utils import DispersionParams, omega, omega_prime

logger = logging.getLogger(__name__)

RECIPES = ('basic', 'refined')
MIN_POINTS_PER_PACKET = 8
DEFAULT_H_MU = {'basic': 0.02, 'refined': 0.5}
KERNEL_SAMPLES = 257


def _ramp(s):
    return 0.5 * (1.0 - np.cos(math.pi * np.clip(s, 0.0, 1.0)))


def _ramp_slope(s):
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, 0.5 * math.pi * np.sin(math.pi * np.clip(s, 0.0, 1.0)), 0.0)


def smoothed_indicator(x, low, high, taper):
    """1 on the interior of [low, high], raised-cosine ramps of length taper*(high-low) at both ends"""
    x = np.asarray(x, dtype=float)
    ramp = taper * (high - low)
    if ramp <= 0.0:
        return ((x >= low) & (x <= high)).astype(float)
    return _ramp((x - low) / ramp) * _ramp((high - x) / ramp)


def smoothed_indicator_slope(x, low, high, taper):
    x = np.asarray(x, dtype=float)
    ramp = taper * (high - low)
    if ramp <= 0.0:
        return np.zeros_like(x)
    left, right = (x - low) / ramp, (high - x) / ramp
    return (_ramp_slope(left) * _ramp(right) - _ramp(left) * _ramp_slope(right)) / ramp


@dataclass(frozen=True)
class WavePacket:
    """Smoothed chi_[xi_low, xi_high](xi) chi_{|lambda - omega(xi)| <= width}(lambda)"""
    xi_low: float
    xi_high: float
    modulation_width: float = 1.0
    smoothing: float = 0.10

    @classmethod
    def spanning(cls, xi_low, width, modulation_width=1.0, smoothing=0.10):
        """[xi_low, xi_low + width]; a width lost to rounding is a resolution failure, not an empty packet"""
        if width > 0 and xi_low + width == xi_low:
            raise ResolutionError(
                f"packet of width {width:.3g} at |xi| = {abs(xi_low):.3g} collapses in double precision")
        return cls(xi_low, xi_low + width, modulation_width, smoothing)

    def __post_init__(self):
        if not self.xi_high > self.xi_low:
            raise ConfigurationError(f"empty frequency support [{self.xi_low}, {self.xi_high}]")
        if self.modulation_width <= 0:
            raise ConfigurationError(f"modulation width must be positive, got {self.modulation_width}")
        if not 0.0 <= self.smoothing < 0.5:
            raise ConfigurationError(f"smoothing must lie in [0, 0.5), got {self.smoothing}")

    @property
    def support_width(self):
        return self.xi_high - self.xi_low

    def amplitude(self, xi):
        return smoothed_indicator(xi, self.xi_low, self.xi_high, self.smoothing)

    def amplitude_slope(self, xi):
        return smoothed_indicator_slope(xi, self.xi_low, self.xi_high, self.smoothing)

    def modulation_profile(self, mu):
        w = self.modulation_width
        return smoothed_indicator(mu, -w, w, self.smoothing)

    def modulation_slope(self, mu):
        w = self.modulation_width
        return smoothed_indicator_slope(mu, -w, w, self.smoothing)

    def closed_form_mass(self):
        """int |u^|^2 d xi d lambda for the raised-cosine profiles"""
        shrink = 1.0 - 1.25 * self.smoothing
        return self.support_width * shrink * 2 * self.modulation_width * shrink


@dataclass(frozen=True)
class SampledPacket:
    packet: WavePacket
    field: ModulationField
    x_weighted: ModulationField
    t_weighted: ModulationField

    @property
    def weighted(self):
        return self.x_weighted, self.t_weighted


def sample_packet(params, packet, n_xi, h_mu):
    """The packet on a (xi, mu) grid, with the x and t weights in closed form.

    F(x u) = -i d_xi u^ and F(t u) = i d_lambda u^; at fixed lambda
    d_xi u^ = A'(xi) B(mu) - A(xi) omega'(xi) B'(mu).
    """
    if n_xi < MIN_POINTS_PER_PACKET:
        raise ResolutionError(
            f"{n_xi} samples across a packet, need {MIN_POINTS_PER_PACKET}", required=MIN_POINTS_PER_PACKET)
    xi = np.linspace(packet.xi_low, packet.xi_high, n_xi)
    if np.any(np.diff(xi) <= 0) or np.min(np.diff(xi)) < 64 * np.finfo(float).eps * max(abs(xi[-1]), 1.0):
        raise ResolutionError(
            f"packet of width {packet.support_width:.3g} at |xi| = {abs(packet.xi_high):.3g} "
            f"cannot be resolved in double precision", required=n_xi)
    w = packet.modulation_width
    n_mu = max(MIN_POINTS_PER_PACKET, int(math.ceil(2 * w / h_mu)) + 1)
    mu = np.linspace(-w, w, n_mu)
    a, da = packet.amplitude(xi), packet.amplitude_slope(xi)
    b, db = packet.modulation_profile(mu), packet.modulation_slope(mu)
    coeffs = a[:, None] * b[None, :]
    d_xi = da[:, None] * b[None, :] - (a * omega_prime(params, xi))[:, None] * db[None, :]
    d_lambda = a[:, None] * db[None, :]
    return SampledPacket(
        packet=packet,
        field=ModulationField(xi, mu, coeffs),
        x_weighted=ModulationField(xi, mu, -1j * d_xi),
        t_weighted=ModulationField(xi, mu, 1j * d_lambda),
    )


@dataclass(frozen=True)
class InteractionExperiment:
    a: float
    n_values: tuple = (64, 128, 256, 512, 1024, 2048, 4096)
    recipe: str = 'basic'
    b: float = 0.5
    smoothing: float = 0.10
    modulation_width: float = 1.0
    alpha_constant: float = 1.0
    xi_points: int = 64
    output_rows: int = 64
    h_mu: float = None
    max_mu_points: int = 4_000_000
    mu_halfwidth: float = None
    layer_fraction: float = 1.0

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ConfigurationError(f"recipe must be one of {RECIPES}, got {self.recipe!r}")
        if not self.n_values:
            raise ConfigurationError("the N sweep is empty")
        if any(n < 2 for n in self.n_values):
            raise ConfigurationError(f"every N must be at least 2, got {self.n_values}")
        if self.alpha_constant <= 0:
            raise ConfigurationError(f"alpha_constant must be positive, got {self.alpha_constant}")
        if self.output_rows < MIN_POINTS_PER_PACKET:
            raise ConfigurationError(f"output_rows must be at least {MIN_POINTS_PER_PACKET}")
        if self.h_mu is not None and self.h_mu <= 0:
            raise ConfigurationError(f"h_mu must be positive, got {self.h_mu}")
        if not 0 < self.layer_fraction <= 1:
            raise ConfigurationError(f"layer_fraction must lie in (0, 1], got {self.layer_fraction}")

    @property
    def params(self):
        return DispersionParams(self.a)

    @property
    def mu_step(self):
        return self.h_mu if self.h_mu is not None else DEFAULT_H_MU[self.recipe]

    def thin_width(self, n):
        """alpha ~ N^{-1-a} (basic) or beta = N^{-a/2} (refined)"""
        if self.recipe == 'basic':
            return self.alpha_constant * n ** (-1.0 - self.a)
        return n ** (-self.a / 2.0)


def build_packets(experiment, n):
    """basic: [alpha/2, alpha] and [N, N+alpha]; refined: [-beta, beta] and [N, N+beta]"""
    params = experiment.params
    width = experiment.thin_width(n)
    if experiment.recipe == 'basic':
        low = WavePacket.spanning(width / 2, width / 2, experiment.modulation_width, experiment.smoothing)
    else:
        low = WavePacket.spanning(-width, 2 * width, experiment.modulation_width, experiment.smoothing)
    high = WavePacket.spanning(float(n), width, experiment.modulation_width, experiment.smoothing)
    h_mu = min(experiment.mu_step, experiment.modulation_width / 8)
    return (sample_packet(params, low, experiment.xi_points, h_mu),
            sample_packet(params, high, experiment.xi_points, h_mu))


def interaction_resonance(params, xi_low, xi_high):
    """Omega(xi_low, xi_high) for xi_high > 0 and xi_low + xi_high > 0, without cancellation"""
    xi_low = np.asarray(xi_low, dtype=float)
    xi_high = np.asarray(xi_high, dtype=float)
    p = 2.0 + params.a
    growth = xi_high ** p * np.expm1(p * np.log1p(xi_low / xi_high))
    return growth - omega(params, xi_low)


class ProductEngine:
    """Rows of F(d_x(u1 u2))(xi, mu) for a low-frequency packet u1 and a high-frequency packet u2"""

    def __init__(self, params, low, high, n_rows, h_mu, max_mu_points=4_000_000, mu_halfwidth=None):
        if high.xi_low <= 0 or high.xi_low + low.xi_low <= 0:
            raise ConfigurationError("the high packet must sit at positive frequency above the low one")
        self.params = params
        self.low = low
        self.high = high
        self.h_mu = h_mu
        self.xi = np.linspace(low.xi_low + high.xi_low, low.xi_high + high.xi_high, n_rows)
        self.kernel_reach = low.modulation_width + high.modulation_width
        self._quad_step = min(low.support_width, high.support_width) / (2 * MIN_POINTS_PER_PACKET)

        lowest, highest = math.inf, -math.inf
        for row in self.xi:
            xi1, _ = self._nodes(row)
            if xi1.size:
                shift = -interaction_resonance(params, xi1, row - xi1)
                lowest, highest = min(lowest, float(shift.min())), max(highest, float(shift.max()))
        reach = self.kernel_reach + 4 * h_mu
        lo = math.floor((lowest - reach) / h_mu)
        hi = math.ceil((highest + reach) / h_mu)
        if mu_halfwidth is not None and max(abs(lo), abs(hi)) * h_mu > mu_halfwidth:
            raise CoverageError(
                f"convolution support reaches |mu| = {max(abs(lo), abs(hi)) * h_mu:.4g}, "
                f"beyond the window {mu_halfwidth:.4g}")
        n_mu = hi - lo + 1
        if n_mu > max_mu_points:
            raise ResolutionError(
                f"the product needs {n_mu} modulation samples, more than {max_mu_points}", required=n_mu)
        self.mu = (lo + np.arange(n_mu)) * h_mu
        self._offset = lo
        self._kernel, self._kernel_slope = self._modulation_kernel()
        logger.debug("product engine: %d rows x %d modulation samples", n_rows, n_mu)

    def _modulation_kernel(self):
        """K = B1 * B2 and K' sampled at multiples of h_mu"""
        reach = self.kernel_reach
        fine = np.linspace(-reach, reach, 2 * KERNEL_SAMPLES - 1)
        h_fine = fine[1] - fine[0]
        b1 = self.low.modulation_profile(fine)
        b2 = self.high.modulation_profile(fine)
        db2 = self.high.modulation_slope(fine)
        full = np.convolve(b1, b2, mode='same') * h_fine
        full_slope = np.convolve(b1, db2, mode='same') * h_fine
        m = int(math.ceil(reach / self.h_mu))
        nodes = np.arange(-m, m + 1) * self.h_mu
        return (np.interp(nodes, fine, full, left=0.0, right=0.0),
                np.interp(nodes, fine, full_slope, left=0.0, right=0.0))

    def _nodes(self, row):
        lo = max(self.low.xi_low, row - self.high.xi_high)
        hi = min(self.low.xi_high, row - self.high.xi_low)
        if hi <= lo:
            return np.empty(0), 0.0
        coarse = np.linspace(lo, hi, 33)
        spread = np.ptp(interaction_resonance(self.params, coarse, row - coarse))
        n = max(4 * MIN_POINTS_PER_PACKET + 1,
                int(math.ceil((hi - lo) / self._quad_step)) + 1,
                int(math.ceil(2 * spread / self.h_mu)) + 1)
        xi1 = np.linspace(lo, hi, n)
        return xi1, (hi - lo) / (n - 1)

    def _deposit(self, positions, weights):
        """Linear-interpolation deposit onto the mu lattice (cell sums, not densities)"""
        index = positions / self.h_mu - self._offset
        left = np.floor(index).astype(int)
        frac = index - left
        n_mu = self.mu.size
        out = np.bincount(left, weights=weights * (1 - frac), minlength=n_mu)[:n_mu]
        return out + np.bincount(left + 1, weights=weights * frac, minlength=n_mu)[:n_mu]

    def row(self, k, weighted=False):
        """F at xi = self.xi[k]; with weighted=True also F(x .) and F(t .) of the product"""
        xi = self.xi[k]
        xi1, h1 = self._nodes(xi)
        zero = np.zeros(self.mu.size, dtype=complex)
        if xi1.size == 0:
            return (zero, zero, zero) if weighted else zero
        xi2 = xi - xi1
        shift = -interaction_resonance(self.params, xi1, xi2)
        a1 = self.low.amplitude(xi1)
        a2 = self.high.amplitude(xi2)
        trapezoid = np.full(xi1.size, h1)
        trapezoid[[0, -1]] *= 0.5
        scale = -1j * xi / (2 * math.pi) ** 2
        deposit = self._deposit(shift, a1 * a2 * trapezoid)
        value = scale * signal.fftconvolve(deposit, self._kernel, mode='same')
        if not weighted:
            return value
        # d_xi at fixed lambda: A1 A2' K - A1 A2 omega'(xi2) K', plus the d_x factor's own derivative
        slope_deposit = self._deposit(shift, a1 * self.high.amplitude_slope(xi2) * trapezoid)
        drift_deposit = self._deposit(shift, a1 * a2 * omega_prime(self.params, xi2) * trapezoid)
        k_slope = self._kernel_slope
        d_xi = (scale * (signal.fftconvolve(slope_deposit, self._kernel, mode='same')
                         - signal.fftconvolve(drift_deposit, k_slope, mode='same'))
                + value / xi)
        d_mu = scale * signal.fftconvolve(deposit, k_slope, mode='same')
        return value, -1j * d_xi, 1j * d_mu

    @property
    def h_xi(self):
        return float(self.xi[1] - self.xi[0])

    def field(self):
        return ModulationField(self.xi, self.mu, np.array([self.row(k) for k in range(self.xi.size)]))

    def weighted_profiles(self, s_values):
        """mu-profiles sum_xi (1+|xi|)^{2s} |.|^2 h_xi for F, F(x .), F(t .) at the given s indices"""
        s_value, s_x, s_t = s_values
        profiles = [np.zeros(self.mu.size) for _ in range(3)]
        for k, xi in enumerate(self.xi):
            value, xf, tf = self.row(k, weighted=True)
            for profile, row, s in zip(profiles, (value, xf, tf), (s_value, s_x, s_t)):
                profile += (1.0 + abs(xi)) ** (2 * s) * np.abs(row) ** 2 * self.h_xi
        return profiles

    def profile(self, s, box=None):
        """mu-profile at index s, and the unweighted mass fraction inside box=(xi_lo, xi_hi, mu_half)"""
        profile = np.zeros(self.mu.size)
        inside = total = 0.0
        for k, xi in enumerate(self.xi):
            row = np.abs(self.row(k)) ** 2
            profile += (1.0 + abs(xi)) ** (2 * s) * row * self.h_xi
            mass = float(row.sum())
            total += mass
            if box is not None and box[0] <= xi <= box[1]:
                inside += float(row[np.abs(self.mu) <= box[2]].sum())
        fraction = inside / total if total > 0 else 0.0
        return profile, fraction


def profile_layer_masses(mu, profile, h_mu):
    decomposition = DyadicDecomposition.for_extent(float(np.max(np.abs(mu))))
    masses = np.array([h_mu * float(np.sum(decomposition.layer(j, mu) * profile))
                       for j in decomposition.layers()])
    return masses, decomposition


def profile_norm_X(mu, profile, h_mu, b):
    """sum_j 2^{jb} m_j^{1/2} from a mu-profile already summed over xi"""
    masses, _ = profile_layer_masses(mu, profile, h_mu)
    return float(np.sum(2.0 ** (b * np.arange(masses.size)) * np.sqrt(np.maximum(masses, 0.0))))


def engine_for(experiment, u1, u2):
    return ProductEngine(experiment.params, u1.packet, u2.packet, experiment.output_rows,
                         experiment.mu_step, experiment.max_mu_points, experiment.mu_halfwidth)


def predicted_box(params, u1, u2, engine):
    """Output xi support and |mu| <= K reach + the largest |Omega| on the packet corners"""
    corners = [interaction_resonance(params, p, q)
               for p in (u1.packet.xi_low, u1.packet.xi_high)
               for q in (u2.packet.xi_low, u2.packet.xi_high)]
    return engine.xi[0], engine.xi[-1], engine.kernel_reach + float(np.max(np.abs(corners)))


@dataclass
class BilinearSides:
    a: float
    n: int
    recipe: str
    b: float
    lhs: float
    rhs_terms: tuple
    box_fraction: float
    lhs_y: float = None

    @property
    def ratio(self):
        return self.lhs / max(self.rhs_terms)

    def to_record(self):
        padded = tuple(self.rhs_terms) + (None,) * (3 - len(self.rhs_terms))
        return {'a': self.a, 'N': self.n, 'recipe': self.recipe, 'b': self.b, 'lhs': self.lhs,
                'rhs1': padded[0], 'rhs2': padded[1], 'rhs3': padded[2], 'ratio': self.ratio,
                'box_fraction': self.box_fraction}


def _rhs_terms(experiment, u1, u2, b):
    """(NoY) for the basic recipe; the three sizes of the full estimate for the refined one"""
    params = experiment.params
    s = params.s_star
    x1 = norm_X(params, u1.field, s, b)
    x2 = norm_X(params, u2.field, s, b)
    if experiment.recipe == 'basic':
        return (x1 * x2,)
    y1 = _norm_y(params, u1, b)
    y2 = _norm_y(params, u2, b)
    return (x1 * x2, x1 * math.sqrt(x2 * y2), x2 * math.sqrt(x1 * y1))


def _norm_y(params, u, b):
    """Y^b_{-s*, s*} from the closed-form weighted packets"""
    s = params.s_star
    return norm_X(params, u.x_weighted, -s, b) + norm_X(params, u.t_weighted, s, b)


def bilinear_sides(experiment, n):
    """Both sides of the bilinear estimate on the packet pair at frequency N"""
    params = experiment.params
    b = experiment.b
    s = params.s_star
    u1, u2 = build_packets(experiment, n)
    engine = engine_for(experiment, u1, u2)
    box = predicted_box(params, u1, u2, engine)
    profile, fraction = engine.profile(s, box)
    lhs = profile_norm_X(engine.mu, profile, engine.h_mu, -b)
    lhs_y = None
    if experiment.recipe == 'refined':
        _, x_profile, t_profile = engine.weighted_profiles((s, -s, s))
        lhs_y = (profile_norm_X(engine.mu, x_profile, engine.h_mu, -b)
                 + profile_norm_X(engine.mu, t_profile, engine.h_mu, -b))
    sides = BilinearSides(a=experiment.a, n=n, recipe=experiment.recipe, b=b, lhs=lhs,
                          rhs_terms=_rhs_terms(experiment, u1, u2, b), box_fraction=fraction, lhs_y=lhs_y)
    logger.debug("N=%d %s: lhs=%.4g ratio=%.4g", n, experiment.recipe, sides.lhs, sides.ratio)
    return sides


@dataclass
class RefinedInteraction:
    a: float
    n: int
    b: float
    lhs: float
    rhs_terms: tuple
    dyadic_sum: float
    n_layers: int

    @property
    def ratio(self):
        return self.lhs / max(self.rhs_terms)

    def to_record(self):
        return {'a': self.a, 'N': self.n, 'recipe': 'refined', 'b': self.b, 'lhs': self.lhs,
                'rhs1': self.rhs_terms[0], 'rhs2': self.rhs_terms[1], 'rhs3': self.rhs_terms[2],
                'ratio': self.ratio, 'dyadic_sum': self.dyadic_sum, 'n_layers': self.n_layers}


def dyadic_sum(b, top_layer):
    """sum_{0 <= j <= top_layer} 2^{j(1/2 - b)}; at b = 1/2 this counts the layers"""
    return float(np.sum(2.0 ** ((0.5 - b) * np.arange(top_layer + 1))))


def refined_interaction(experiment, n, b=None):
    """Left side X^{-b}_{s*} of d_x(u1 u2) over the full layer range against the largest right term.

    The layer count runs up to log2 of the occupied modulation extent, scaled by layer_fraction.
    """
    if experiment.recipe != 'refined':
        raise ConfigurationError("refined_interaction needs the refined packet recipe")
    b = experiment.b if b is None else b
    params = experiment.params
    s = params.s_star
    u1, u2 = build_packets(experiment, n)
    engine = engine_for(experiment, u1, u2)
    profile, _ = engine.profile(s)
    lhs = profile_norm_X(engine.mu, profile, engine.h_mu, -b)
    occupied = engine.mu[profile > 1e-12 * profile.max()] if profile.max() > 0 else engine.mu[:1]
    extent = max(float(np.max(np.abs(occupied))), 1.0)
    top = int(math.floor(experiment.layer_fraction * math.log2(extent)))
    return RefinedInteraction(a=experiment.a, n=n, b=b, lhs=lhs,
                              rhs_terms=_rhs_terms(experiment, u1, u2, b),
                              dyadic_sum=dyadic_sum(b, top), n_layers=top + 1)


@dataclass
class SweepReport:
    recipe: str
    a: float
    b: float
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)

    @property
    def n_values(self):
        return [row.n for row in self.rows]

    @property
    def ratios(self):
        return [row.ratio for row in self.rows]

    def to_summary(self):
        return {'recipe': self.recipe, 'a': self.a, 'b': self.b,
                'fits': {name: fit.to_record() for name, fit in self.fits.items()}}


def sweep(experiment, map_fn=map):
    """Every N of the experiment, fitted; map_fn must preserve order (e.g. Pool.imap)"""
    if experiment.recipe == 'basic':
        rows = list(map_fn(_basic_point, [(experiment, n) for n in experiment.n_values]))
    else:
        rows = list(map_fn(_refined_point, [(experiment, n) for n in experiment.n_values]))
    report = SweepReport(recipe=experiment.recipe, a=experiment.a, b=experiment.b, rows=rows)
    report.fits['ratio_exponent'] = fit_exponent(report.n_values, report.ratios)
    if experiment.recipe == 'refined':
        report.fits['ratio_log_growth'] = fit_log_growth(report.n_values, report.ratios)
        corrected = [row.ratio / row.dyadic_sum for row in rows]
        report.fits['log_corrected_exponent'] = fit_exponent(report.n_values, corrected)
    return report


def _basic_point(args):
    experiment, n = args
    return bilinear_sides(experiment, n)


def _refined_point(args):
    experiment, n = args
    return refined_interaction(experiment, n)
