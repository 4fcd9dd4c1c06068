"""Two-dimensional (xi, lambda) coefficient grids.

Space carries e^{+ix xi}, time carries e^{-it lambda}, so that W(t)u0 lives on the
surface lambda = omega(xi).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from gbolab.utils.dyadic_utils import bump
from gbolab.utils.errors import ConfigurationError, CoverageError
from gbolab.utils.spectral_utils import grid_omega, omega

logger = logging.getLogger(__name__)

DEFAULT_SURFACE_MARGIN = 2.0


@dataclass(frozen=True)
class TimeGrid:
    n_points: int
    period: float

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points <= 0 or self.n_points % 2:
            raise ConfigurationError(f"time sample count must be even and positive, got {self.n_points}")
        if not math.isfinite(self.period) or self.period <= 0:
            raise ConfigurationError(f"time window must be positive, got {self.period}")

    @property
    def dt(self):
        return self.period / self.n_points

    @property
    def d_lambda(self):
        return 2 * math.pi / self.period

    @property
    def lambda_max(self):
        return math.pi / self.dt

    @property
    def t(self):
        return np.arange(self.n_points) * self.dt

    @property
    def wrapped_t(self):
        """Sample times as representatives in [-T/2, T/2)"""
        half = self.period / 2
        return (self.t + half) % self.period - half

    @property
    def frequencies(self):
        return sp_fft.fftfreq(self.n_points, d=self.dt) * 2 * math.pi


class SpacetimeField:
    """Coefficients u^(xi_k, lambda_m) on a uniform grid; immutable"""

    __slots__ = ('xi_grid', 'time_grid', 'coeffs')

    def __init__(self, xi_grid, time_grid, coeffs):
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (xi_grid.n_points, time_grid.n_points):
            raise ConfigurationError(
                f"coefficient shape {coeffs.shape} does not match grids "
                f"({xi_grid.n_points}, {time_grid.n_points})")
        coeffs.setflags(write=False)
        object.__setattr__(self, 'xi_grid', xi_grid)
        object.__setattr__(self, 'time_grid', time_grid)
        object.__setattr__(self, 'coeffs', coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("SpacetimeField is immutable")

    @classmethod
    def from_samples(cls, xi_grid, time_grid, samples):
        """samples[n, m] = u(x_n, t_m)"""
        samples = np.asarray(samples)
        if samples.shape != (xi_grid.n_points, time_grid.n_points):
            raise ConfigurationError(f"sample shape {samples.shape} does not match grids")
        profile = xi_grid.length * sp_fft.ifft(samples, axis=0)
        return cls.from_time_profile(xi_grid, time_grid, profile)

    @classmethod
    def from_time_profile(cls, xi_grid, time_grid, profile):
        """profile[k, m] = spatial coefficient at xi_k and time t_m"""
        return cls(xi_grid, time_grid, time_grid.dt * sp_fft.fft(profile, axis=1))

    def with_coeffs(self, coeffs):
        return SpacetimeField(self.xi_grid, self.time_grid, coeffs)

    def time_profile(self):
        return sp_fft.ifft(self.coeffs, axis=1) / self.time_grid.dt

    def samples(self):
        return sp_fft.fft(self.time_profile(), axis=0) / self.xi_grid.length

    @property
    def xi(self):
        return self.xi_grid.frequencies

    @property
    def cell_area(self):
        return self.xi_grid.d_xi * self.time_grid.d_lambda

    def modulation(self, params):
        return self.time_grid.frequencies[None, :] - grid_omega(params, self.xi_grid)[:, None]

    def fourier_l2_norm(self):
        """L^2 over (xi, lambda) with d xi d lambda; equals 2 pi times the physical norm"""
        return math.sqrt(self.cell_area * float(np.sum(np.abs(self.coeffs) ** 2)))

    def physical_l2_norm(self):
        samples = self.samples()
        return math.sqrt(self.xi_grid.dx * self.time_grid.dt * float(np.sum(np.abs(samples) ** 2)))

    def is_real(self, tol=1e-10):
        n_x, n_t = self.coeffs.shape
        mirrored = self.coeffs[(-np.arange(n_x)) % n_x][:, (-np.arange(n_t)) % n_t]
        scale = max(float(np.max(np.abs(self.coeffs))), 1e-300)
        return bool(np.max(np.abs(self.coeffs - np.conj(mirrored))) <= tol * scale)

    def check_coverage(self, params, margin=DEFAULT_SURFACE_MARGIN, rel_floor=1e-14):
        """The lambda window must contain omega(xi) + margin on every occupied xi row"""
        row_size = np.max(np.abs(self.coeffs), axis=1)
        occupied = row_size > rel_floor * max(float(np.max(row_size)), 1e-300)
        if not np.any(occupied):
            return
        reach = float(np.max(np.abs(omega(params, self.xi[occupied])))) + margin
        if reach >= self.time_grid.lambda_max:
            raise CoverageError(
                f"dispersive surface reaches |lambda| = {reach:.4g} but the window ends at "
                f"{self.time_grid.lambda_max:.4g}; use dt < {math.pi / reach:.4g}")

    def __add__(self, other):
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__


class ModulationField:
    """Coefficients on a local (xi, mu) grid with mu = lambda - omega(xi).

    Used for packets at large frequency, where no single uniform (xi, lambda) grid fits.
    At fixed xi, d lambda = d mu, so every norm is the same quadrature as on a SpacetimeField.
    """

    __slots__ = ('xi', 'mu', 'coeffs')

    def __init__(self, xi, mu, coeffs):
        xi = np.array(xi, dtype=float)
        mu = np.array(mu, dtype=float)
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (xi.size, mu.size):
            raise ConfigurationError(f"coefficient shape {coeffs.shape} does not match ({xi.size}, {mu.size})")
        if xi.size < 2 or mu.size < 2:
            raise ConfigurationError("modulation grids need at least two points per axis")
        for arr in (xi, mu, coeffs):
            arr.setflags(write=False)
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'coeffs', coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("ModulationField is immutable")

    def with_coeffs(self, coeffs):
        return ModulationField(self.xi, self.mu, coeffs)

    @property
    def h_xi(self):
        return float(self.xi[1] - self.xi[0])

    @property
    def h_mu(self):
        return float(self.mu[1] - self.mu[0])

    @property
    def cell_area(self):
        return self.h_xi * self.h_mu

    def modulation(self, params):
        return np.broadcast_to(self.mu[None, :], self.coeffs.shape)

    def fourier_l2_norm(self):
        return math.sqrt(self.cell_area * float(np.sum(np.abs(self.coeffs) ** 2)))

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__


def time_cutoff(t, delta):
    """psi(t / delta), the bump shared with the dyadic layers"""
    return bump(np.asarray(t, dtype=float) / delta)


def windowed_linear_flow(params, u0, time_grid, tau):
    """psi(t/tau) W(t) u0 sampled on the grid"""
    t = time_grid.wrapped_t
    phase = np.exp(1j * grid_omega(params, u0.grid)[:, None] * t[None, :])
    profile = u0.coeffs[:, None] * phase * time_cutoff(t, tau)[None, :]
    return SpacetimeField.from_time_profile(u0.grid, time_grid, profile)
