"""Time cutoffs, the truncated Duhamel map and its Picard iteration, cutoff-lemma sweeps.

Fields are handled in the mixed (xi, t) representation. The Duhamel integral is taken in
the interaction picture, where the linear flow drops out and only
int_0^t e^{-i omega t'} g(t') dt' remains; each time step integrates the exponential
against a cubic interpolant of g exactly.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sp_fft

from gbolab.utils.bourgain_utils import (
    norm_Cdual, norm_F, norm_tildeX, norm_X, norm_Y, norm_Z,
)
from gbolab.utils.dyadic_utils import bump
from gbolab.utils.dynamics_utils import SolverConfig, evolve
from gbolab.utils.errors import (
    ConfigurationError, ContractViolationError, DegenerateInputError, DivergenceError, ResolutionError,
)
from gbolab.utils.fit_utils import fit_exponent
from gbolab.utils.spacetime_utils import SpacetimeField, windowed_linear_flow
from gbolab.utils.spectral_utils import grid_omega

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 0.01
SERIES_TERMS = 24
# Lagrange weights on the nodes s = -1, 0, 1, 2 as coefficients of 1, s, s^2, s^3
CUBIC_BASIS = np.array([
    [0.0, -2.0, 3.0, -1.0],
    [6.0, -3.0, -6.0, 3.0],
    [0.0, 6.0, 3.0, -3.0],
    [0.0, -1.0, 0.0, 1.0],
]) / 6.0


@dataclass(frozen=True)
class TimeCutoff:
    """psi(t / delta), psi the dyadic bump: 1 on [-1/2, 1/2], supported in [-1, 1]"""
    delta: float

    def __post_init__(self):
        if not math.isfinite(self.delta) or not 0 < self.delta <= 1:
            raise ConfigurationError(f"cutoff scale must lie in (0, 1], got {self.delta}")

    def __call__(self, t):
        return bump(np.asarray(t, dtype=float) / self.delta)

    def widened(self, t):
        """psi~, psi at double width"""
        return bump(np.asarray(t, dtype=float) / (2 * self.delta))


def apply_cutoff(cutoff, u):
    """psi(t/delta) u, multiplied in physical time"""
    weight = cutoff(u.time_grid.wrapped_t)
    return SpacetimeField.from_time_profile(u.xi_grid, u.time_grid, u.time_profile() * weight[None, :])


def _exponential_moments(z):
    """M_m(z) = int_0^1 s^m e^{zs} ds for m = 0..3; series for |z| < 1, upward recurrence beyond"""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1.0
    safe = np.where(small, 1.0, z)
    ez = np.exp(safe)
    k = np.arange(SERIES_TERMS)
    terms = z[..., None] ** k / np.array([math.factorial(j) for j in k], dtype=float)
    moments = []
    previous = (ez - 1) / safe
    for m in range(4):
        if m:
            previous = (ez - m * previous) / safe
        series = np.sum(terms / (m + k + 1), axis=-1)
        moments.append(np.where(small, series, previous))
    return np.stack(moments, axis=-1)


def _interaction_integral(frequencies, times, g, dt):
    """int_0^t e^{-i omega t'} g(t') dt' at every (sorted, uniformly spaced) time.

    g is taken as the cubic through the four nearest samples of each step, with linearly
    extrapolated ghost samples at both ends; the exponential is integrated exactly.
    """
    moments = _exponential_moments(-1j * frequencies * dt)
    weights = moments @ CUBIC_BASIS.T
    ghost_low = 2 * g[:, :1] - g[:, 1:2]
    ghost_high = 2 * g[:, -1:] - g[:, -2:-1]
    padded = np.concatenate([ghost_low, g, ghost_high], axis=1)
    nodes = (padded[:, :-3], padded[:, 1:-2], padded[:, 2:-1], padded[:, 3:])
    local = sum(weights[:, j:j + 1] * node for j, node in enumerate(nodes))
    phase = np.exp(-1j * frequencies[:, None] * times[None, :-1])
    steps = phase * dt * local
    cumulative = np.concatenate([np.zeros((g.shape[0], 1), dtype=complex), np.cumsum(steps, axis=1)], axis=1)
    origin = int(np.argmin(np.abs(times)))
    return cumulative - cumulative[:, origin:origin + 1]


def nonlinear_profile(v, dealias_fraction=2.0 / 3.0):
    """d_x(v^2) as spatial coefficients at every time sample"""
    grid = v.xi_grid
    mask = grid.dealias_mask(dealias_fraction)
    mask[grid.nyquist_index] = False
    samples = (sp_fft.fft(v.time_profile() * mask[:, None], axis=0) / grid.length).real
    square = grid.length * sp_fft.ifft(samples * samples, axis=0) * mask[:, None]
    return -1j * grid.frequencies[:, None] * square


@dataclass
class DuhamelResult:
    field: SpacetimeField
    quadrature_error: float


def duhamel_map(params, cutoff, u0, v, dealias_fraction=2.0 / 3.0, tolerance=QUADRATURE_TOLERANCE,
                with_estimate=False):
    """psi(t/delta) W(t) u0 - 1/2 psi(t/delta) int_0^t W(t - t') d_x(v^2)(t') dt'.

    The quadrature is checked against the same rule at twice the step; a Richardson
    estimate above ``tolerance`` raises ResolutionError.
    """
    if not v.is_real():
        raise ContractViolationError("the Duhamel map needs a real iterate")
    time_grid = v.time_grid
    order = np.argsort(time_grid.wrapped_t)
    times = time_grid.wrapped_t[order]
    w = grid_omega(params, u0.grid)
    g = nonlinear_profile(v, dealias_fraction)[:, order]

    integral = _interaction_integral(w, times, g, time_grid.dt)
    error = 0.0
    scale = float(np.max(np.abs(integral)))
    if scale > 0:
        origin = int(np.argmin(np.abs(times)))
        coarse = np.arange(origin % 2, times.size, 2)
        coarse_integral = _interaction_integral(w, times[coarse], g[:, coarse], 2 * time_grid.dt)
        error = float(np.max(np.abs(integral[:, coarse] - coarse_integral))) / scale / 3.0
        if error > tolerance:
            raise ResolutionError(
                f"Duhamel quadrature error {error:.2%} exceeds {tolerance:.0%}; refine the time grid",
                required=2 * time_grid.n_points)

    propagated = np.exp(1j * w[:, None] * times[None, :]) * (u0.coeffs[:, None] - 0.5 * integral)
    profile = np.empty_like(propagated)
    profile[:, order] = propagated * cutoff(times)[None, :]
    result = SpacetimeField.from_time_profile(u0.grid, time_grid, profile)
    if with_estimate:
        return DuhamelResult(result, error)
    return result


def _inner_window(cutoff, time_grid):
    return np.abs(time_grid.wrapped_t) < cutoff.delta / 2


def integral_residual(params, cutoff, u0, v, dealias_fraction=2.0 / 3.0):
    """||Phi(v) - v|| / ||v|| on |t| < delta/2, L^2 in x at each time, maximised over t"""
    image = duhamel_map(params, cutoff, u0, v, dealias_fraction)
    inner = _inner_window(cutoff, v.time_grid)
    diff = np.linalg.norm((image.time_profile() - v.time_profile())[:, inner], axis=0)
    size = np.linalg.norm(v.time_profile()[:, inner], axis=0)
    return float(diff.max() / size.max()) if size.max() > 0 else float(diff.max())


def differential_residual(params, cutoff, u0, v, dealias_fraction=2.0 / 3.0):
    """Fourth-order central differences of e^{-i omega t} Phi(v) against -1/2 e^{-i omega t} d_x(v^2) where psi = 1"""
    image = duhamel_map(params, cutoff, u0, v, dealias_fraction)
    time_grid = v.time_grid
    order = np.argsort(time_grid.wrapped_t)
    times = time_grid.wrapped_t[order]
    w = grid_omega(params, u0.grid)
    back = np.exp(-1j * w[:, None] * times[None, :])
    interaction = back * image.time_profile()[:, order]
    forcing = -0.5 * back * nonlinear_profile(v, dealias_fraction)[:, order]
    derivative = (8 * (interaction[:, 3:-1] - interaction[:, 1:-3])
                  - (interaction[:, 4:] - interaction[:, :-4])) / (12 * time_grid.dt)
    inner = np.abs(times[2:-2]) < cutoff.delta / 2
    diff = np.linalg.norm((derivative - forcing[:, 2:-2])[:, inner], axis=0)
    size = np.linalg.norm(forcing[:, 2:-2][:, inner], axis=0)
    return float(diff.max() / size.max()) if size.max() > 0 else float(diff.max())


@dataclass
class PicardState:
    k: int
    field: SpacetimeField
    a_ball: float
    c_emp: float
    differences: list = field(default_factory=list)
    z_norms: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False

    @property
    def ratios(self):
        d = self.differences
        return [d[i + 1] / d[i] if d[i] > 0 else 0.0 for i in range(len(d) - 1)]

    def history_records(self):
        ratios = [None] + self.ratios
        return [{'k': k, 'd_k': d, 'ratio': ratios[k]} for k, d in enumerate(self.differences)]


def picard_iterate(params, cutoff, u0, time_grid, k_max=50, s=None, b=0.5, tolerance=1e-8,
                   c_emp=None, dealias_fraction=2.0 / 3.0):
    """v_{k+1} = Phi(v_k) from v_0 = psi(t/delta) W(t) u0, measured in Z^b_s.

    The ball radius is 2 C ||u0||_{F^s}; without a given constant C is the ratio
    ||v_0||_Z / ||u0||_F of the data itself.
    """
    s = params.s_star if s is None else s
    v = windowed_linear_flow(params, u0, time_grid, cutoff.delta)
    data_norm = norm_F(params, u0, s)
    v_norm = norm_Z(params, v, s, b)
    if c_emp is None:
        c_emp = v_norm / data_norm if data_norm > 0 else 1.0
    a_ball = 2.0 * c_emp * data_norm
    state = PicardState(k=0, field=v, a_ball=a_ball, c_emp=c_emp, z_norms=[v_norm])
    for k in range(k_max):
        image = duhamel_map(params, cutoff, u0, v, dealias_fraction)
        d = norm_Z(params, image - v, s, b)
        state.differences.append(d)
        v = image
        state.k = k + 1
        state.field = v
        z = norm_Z(params, v, s, b)
        state.z_norms.append(z)
        if z > 2 * a_ball:
            state.diverged = True
            logger.debug("picard left the ball at k=%d: %.3g > %.3g", k + 1, z, 2 * a_ball)
            break
        if d <= tolerance * a_ball:
            state.converged = True
            break
    return state


def select_delta(c_emp, a_ball, theta, deltas=tuple(2.0 ** -k for k in range(0, 11))):
    """Largest delta with c_emp delta^{theta/2} a_ball < 1/2"""
    if theta <= 0:
        raise ConfigurationError(f"the gain exponent must be positive, got {theta}")
    for delta in sorted(deltas, reverse=True):
        if c_emp * delta ** (theta / 2) * a_ball < 0.5:
            return delta
    raise ConfigurationError(f"no delta in {min(deltas):.3g}..{max(deltas):.3g} satisfies the smallness rule")


def compare_with_evolution(params, state, cutoff, u0, dealias_fraction=2.0 / 3.0):
    """max relative L^2 distance between the Picard limit and the time stepper on 0 <= t < delta/2"""
    time_grid = state.field.time_grid
    profile = state.field.time_profile()
    steps = [m for m, t in enumerate(time_grid.t) if t < cutoff.delta / 2]
    config = SolverConfig(params=params, dt=time_grid.dt, t_end=steps[-1] * time_grid.dt,
                          dealias_fraction=dealias_fraction, snapshot_interval=time_grid.dt)
    trajectory = evolve(config, u0) if steps[-1] > 0 else None
    worst = 0.0
    for m in steps:
        reference = trajectory.fields[m].coeffs if trajectory is not None else u0.coeffs
        size = np.linalg.norm(reference)
        if size > 0:
            worst = max(worst, float(np.linalg.norm(profile[:, m] - reference) / size))
    return worst


@dataclass
class ContinuityReport:
    sizes: list
    ratios: list
    base_converged: bool

    @property
    def spread(self):
        positive = [r for r in self.ratios if r > 0]
        if not positive:
            return 0.0
        return max(positive) / min(positive) - 1.0


def solution_map_continuity(params, cutoff, u0, direction, sizes, time_grid, s=None, b=0.5, k_max=50):
    """||v(u0 + eps d) - v(u0)||_Z / ||eps d||_F for each perturbation size eps"""
    s = params.s_star if s is None else s
    base = picard_iterate(params, cutoff, u0, time_grid, k_max=k_max, s=s, b=b)
    if not base.converged:
        raise DivergenceError(f"base Picard iteration did not converge in {base.k} steps", step=base.k)
    direction_norm = norm_F(params, direction, s)
    ratios = []
    for size in sizes:
        if size == 0 or direction_norm == 0:
            ratios.append(0.0)
            continue
        perturbed = u0.with_coeffs(u0.coeffs + size * direction.coeffs)
        run = picard_iterate(params, cutoff, perturbed, time_grid, k_max=k_max, s=s, b=b, c_emp=base.c_emp)
        if not run.converged:
            raise DivergenceError(f"perturbed Picard iteration (eps={size:g}) did not converge", step=run.k)
        ratios.append(norm_Z(params, run.field - base.field, s, b) / (abs(size) * direction_norm))
    return ContinuityReport(sizes=list(sizes), ratios=ratios, base_converged=True)


def contraction_sweep(params, u0, deltas, time_grid_for, k_max=20, s=None, b=0.5):
    """Worst per-step ratio d_{k+1}/d_k for each delta and its fitted exponent in delta"""
    worst = []
    for delta in deltas:
        state = picard_iterate(params, TimeCutoff(delta), u0, time_grid_for(delta), k_max=k_max, s=s, b=b)
        worst.append(max(state.ratios) if state.ratios else 0.0)
    return worst, fit_exponent(deltas, worst)


# Each lemma compares the cut-off field psi(t/delta) u with u in a pair of norms.
def _lemma_norms(params, s, b):
    s_star = params.s_star
    return {
        'tilde_x_stability': (lambda u: norm_tildeX(params, u, s, b), lambda u: norm_tildeX(params, u, s, b)),
        'x_half_loss': (lambda u: norm_X(params, u, s, 0.5), lambda u: norm_X(params, u, s, 0.5)),
        'x_gain': (lambda u: norm_X(params, u, s, b), lambda u: norm_X(params, u, s, 0.5)),
        'y_half_loss': (lambda u: norm_Y(params, u, s - 2 * s_star, s, 0.5),
                        lambda u: norm_Y(params, u, s - 2 * s_star, s, 0.5)),
        'y_gain': (lambda u: norm_Y(params, u, s - 2 * s_star, s, b),
                   lambda u: norm_Y(params, u, s - 2 * s_star, s, 0.5)),
        'z_half_loss': (lambda u: norm_Z(params, u, s, 0.5), lambda u: norm_Z(params, u, s, 0.5)),
        'cdual_stability': (lambda u: norm_Cdual(params, u, s), lambda u: norm_Cdual(params, u, s)),
    }


LEMMAS = ('tilde_x_stability', 'x_half_loss', 'x_gain', 'y_half_loss', 'y_gain', 'z_half_loss',
          'cdual_stability')


@dataclass
class LemmaSweep:
    lemma: str
    deltas: list
    ratios: list
    fit: object

    def to_record(self):
        return {'lemma': self.lemma, 'deltas': self.deltas, 'ratios': self.ratios,
                'slope': self.fit.slope, 'r2': self.fit.r2}


def _check_dyadic(deltas):
    for delta in deltas:
        if not 0 < delta <= 1 or abs(math.log2(delta) - round(math.log2(delta))) > 1e-12:
            raise ConfigurationError(f"cutoff scales must be dyadic in (0, 1], got {delta}")


def cutoff_lemma_sweep(params, family, s, b, deltas, lemmas=LEMMAS):
    """sup over the family of ||psi_delta u|| / ||u|| per lemma and delta, with the fitted delta-exponent.

    ``family`` is a list of SpacetimeFields, typically psi(t/tau) W(t) u0 for dyadic tau.
    """
    _check_dyadic(deltas)
    if not family or all(float(np.max(np.abs(u.coeffs))) == 0.0 for u in family):
        raise DegenerateInputError("the lemma family is empty or identically zero")
    family = [u for u in family if float(np.max(np.abs(u.coeffs))) > 0.0]
    norms = _lemma_norms(params, s, b)
    unknown = set(lemmas) - set(norms)
    if unknown:
        raise ConfigurationError(f"unknown lemmas: {sorted(unknown)}")
    sweeps = {}
    for lemma in lemmas:
        cut_norm, base_norm = norms[lemma]
        bases = [base_norm(u) for u in family]
        ratios = []
        for delta in deltas:
            cutoff = TimeCutoff(delta)
            ratios.append(max(cut_norm(apply_cutoff(cutoff, u)) / base
                              for u, base in zip(family, bases) if base > 0))
        sweeps[lemma] = LemmaSweep(lemma, list(deltas), ratios, fit_exponent(deltas, ratios))
        logger.debug("%s: delta-exponent %.3f", lemma, sweeps[lemma].fit.slope)
    return sweeps


def lemma_family(params, u0, time_grid, taus):
    """psi(t/tau) W(t) u0 for each tau"""
    return [windowed_linear_flow(params, u0, time_grid, tau) for tau in taus]
