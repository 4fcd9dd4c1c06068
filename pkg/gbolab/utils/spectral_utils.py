"""Periodic grids, transforms under the e^{+ix xi} convention, multipliers and the linear group.

Exposed coefficients always approximate f^(xi) = int e^{ix xi} f(x) dx on the torus of
period L that stands in for the line.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from gbolab.utils.errors import ConfigurationError, NumericDomainError

logger = logging.getLogger(__name__)

DEFAULT_PERIOD = 2 * math.pi * 64


@dataclass(frozen=True)
class DispersionParams:
    """The exponent a of omega(xi) = xi |xi|^{1+a} and every index derived from it."""
    a: float

    def __post_init__(self):
        if not math.isfinite(self.a) or not 0.0 <= self.a <= 1.0:
            raise ConfigurationError(f"dispersion exponent a must lie in [0, 1], got {self.a}")

    @property
    def s_star(self):
        return (1.0 + self.a) / 2.0

    @property
    def b0(self):
        # Strichartz exponent of the L^4 bound
        return (3.0 + self.a) / (4.0 * (2.0 + self.a))

    @property
    def scaling_index(self):
        # H-dot^{-1/2-a} is invariant under u -> sigma^{1+a} u(sigma x)
        return -0.5 - self.a

    @property
    def b_window(self):
        lower = max(self.b0, (1.0 - self.a) / (2.0 * (1.0 + self.a)))
        return lower, 0.5

    @property
    def b_window_empty(self):
        lower, upper = self.b_window
        return lower >= upper


def omega(params, xi):
    """Dispersive symbol xi |xi|^{1+a}"""
    xi = np.asarray(xi, dtype=float)
    return xi * np.abs(xi) ** (1.0 + params.a)


def grid_omega(params, grid):
    """omega on the grid frequencies, 0 at the Nyquist mode.

    The Nyquist coefficient has no conjugate partner, so any phase on it breaks reality.
    """
    values = omega(params, grid.frequencies)
    values[grid.nyquist_index] = 0.0
    return values


def omega_prime(params, xi):
    xi = np.asarray(xi, dtype=float)
    return (2.0 + params.a) * np.abs(xi) ** (1.0 + params.a)


@dataclass(frozen=True)
class SpatialGrid:
    n_points: int
    length: float = DEFAULT_PERIOD

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points <= 0 or self.n_points % 2:
            raise ConfigurationError(f"n_points must be an even positive integer, got {self.n_points}")
        if not math.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"period must be positive, got {self.length}")

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def d_xi(self):
        return 2 * math.pi / self.length

    @property
    def x(self):
        return np.arange(self.n_points) * self.dx

    @property
    def wrapped_x(self):
        """Sample positions as representatives in [-L/2, L/2)"""
        half = self.length / 2
        return (self.x + half) % self.length - half

    @property
    def frequencies(self):
        """xi_k = 2 pi k / L in transform order; k = -n/2 is the Nyquist mode"""
        return sp_fft.fftfreq(self.n_points, d=self.dx) * 2 * math.pi

    @property
    def nyquist_index(self):
        return self.n_points // 2

    def dealias_mask(self, fraction):
        """Keep |k| <= fraction * n/2"""
        k = np.abs(sp_fft.fftfreq(self.n_points) * self.n_points)
        return k <= fraction * self.n_points / 2


class SpectralField:
    """Fourier coefficients of a periodic field, immutable after construction"""

    __slots__ = ('grid', 'coeffs')

    def __init__(self, grid, coeffs):
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (grid.n_points,):
            raise ConfigurationError(
                f"coefficient count {coeffs.shape} does not match grid size {grid.n_points}")
        coeffs.setflags(write=False)
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'coeffs', coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    @classmethod
    def from_samples(cls, grid, samples):
        return fourier_forward(grid, samples)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    def with_coeffs(self, coeffs):
        return SpectralField(self.grid, coeffs)

    def samples(self):
        return fourier_inverse(self)

    def real_samples(self):
        return fourier_inverse(self).real

    def mirrored(self):
        """Coefficients at -xi_k (the Nyquist mode maps to itself)"""
        return self.coeffs[(-np.arange(self.grid.n_points)) % self.grid.n_points]

    def is_real(self, tol=1e-10):
        scale = max(np.max(np.abs(self.coeffs)), 1e-300)
        return bool(np.max(np.abs(self.coeffs - np.conj(self.mirrored()))) <= tol * scale)

    def l2_norm(self):
        """Physical L^2 norm over one period, via the discrete Parseval identity"""
        return math.sqrt(self.grid.d_xi / (2 * math.pi) * float(np.sum(np.abs(self.coeffs) ** 2)))

    def sobolev_norm(self, s):
        """(int (1+|xi|)^{2s} |f^|^2 d xi)^{1/2}, Fourier-side quadrature"""
        weight = (1.0 + np.abs(self.grid.frequencies)) ** (2 * s)
        return math.sqrt(self.grid.d_xi * float(np.sum(weight * np.abs(self.coeffs) ** 2)))

    def homogeneous_seminorm(self, s):
        xi = self.grid.frequencies
        nonzero = xi != 0
        weight = np.abs(xi[nonzero]) ** (2 * s)
        return math.sqrt(self.grid.d_xi * float(np.sum(weight * np.abs(self.coeffs[nonzero]) ** 2)))


def fourier_forward(grid, samples):
    """coeffs(xi_k) = dx sum_n e^{i x_n xi_k} f(x_n)"""
    samples = np.asarray(samples)
    if samples.shape != (grid.n_points,):
        raise ConfigurationError(
            f"sample count {samples.shape} does not match grid size {grid.n_points}")
    # scipy's ifft carries e^{+2 pi i k n / N} / N
    return SpectralField(grid, grid.length * sp_fft.ifft(samples))


def fourier_inverse(field):
    return sp_fft.fft(field.coeffs) / field.grid.length


def evaluate_symbol(symbol, xi):
    if callable(symbol):
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            values = np.asarray(symbol(xi))
    else:
        values = np.asarray(symbol)
    if values.shape == ():
        values = np.full(xi.shape, values)
    if values.shape != xi.shape:
        raise ConfigurationError(f"symbol shape {values.shape} does not match frequencies {xi.shape}")
    return values


def apply_multiplier(field, symbol, odd=False):
    """Multiply coefficients pointwise by m(xi).

    Non-finite symbol values are an error unless the coefficient there is exactly zero
    (so D^{-s} can act on fields without a zero mode). Odd symbols zero the Nyquist mode.
    """
    values = evaluate_symbol(symbol, field.grid.frequencies)
    bad = ~np.isfinite(values)
    if np.any(bad & (field.coeffs != 0)):
        where = field.grid.frequencies[bad & (field.coeffs != 0)]
        raise NumericDomainError(f"symbol is not finite at frequencies {where[:5].tolist()}")
    values = np.where(bad, 0.0, values)
    coeffs = field.coeffs * values
    if odd:
        coeffs[field.grid.nyquist_index] = 0.0
    return field.with_coeffs(coeffs)


def fractional_derivative(field, s):
    """D^s, the multiplier |xi|^s"""
    return apply_multiplier(field, lambda xi: np.abs(xi) ** s)


def derivative(field):
    """d/dx; under the e^{+ix xi} convention its symbol is -i xi"""
    return apply_multiplier(field, lambda xi: -1j * xi, odd=True)


def linear_propagator(params, field, t):
    """W(t): the multiplier e^{+i omega(xi) t}"""
    phase = np.exp(1j * grid_omega(params, field.grid) * t)
    return field.with_coeffs(field.coeffs * phase)
