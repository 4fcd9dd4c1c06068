"""Resonance function and the frequency-interaction bounds behind the bilinear estimates."""
import logging
from dataclasses import dataclass, field

import numpy as np

from gbolab.utils.spectral_utils import omega, omega_prime

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 0.9


@dataclass(frozen=True)
class FrequencyPair:
    xi1: float
    xi2: float

    @property
    def sign_pattern(self):
        product = self.xi1 * self.xi2
        if product > 0:
            return 'same'
        if product < 0:
            return 'opposite'
        return 'zero'

    @property
    def comparability(self):
        """'comparable' when |xi1|/4 <= |xi2| <= |xi1| (ties included), else 'low' or 'high'"""
        a1, a2 = abs(self.xi1), abs(self.xi2)
        if a2 > a1:
            return 'high'
        if a2 < a1 / 4:
            return 'low'
        return 'comparable'


def resonance_fn(params, xi1, xi2):
    """omega(xi1 + xi2) - omega(xi1) - omega(xi2)"""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return omega(params, xi1 + xi2) - omega(params, xi1) - omega(params, xi2)


def jacobian(params, xi1, xi2):
    """|omega'(xi1) - omega'(xi2)|"""
    return np.abs(omega_prime(params, xi1) - omega_prime(params, xi2))


def same_sign_profile(params, beta):
    """f(beta) = (1+beta)^{2+a} - 1 - beta^{2+a}, i.e. |Omega|/|xi1|^{2+a} at xi2 = beta xi1"""
    beta = np.asarray(beta, dtype=float)
    p = 2.0 + params.a
    return (1.0 + beta) ** p - 1.0 - beta ** p


def brute_force_constants(params, n_beta=1000):
    """Minimal |Omega| / rhs over a beta grid for both sign branches, scaled by SAFETY_FACTOR.

    By homogeneity only the ratio beta = |xi2|/|xi1| in [1/4, 1] matters. The opposite
    branch excludes beta = 1 where both sides vanish.
    """
    beta = np.linspace(0.25, 1.0, n_beta)
    same = float(np.min(same_sign_profile(params, beta)))
    beta_opp = beta[beta < 1.0]
    opposite_ratio = np.abs(resonance_fn(params, 1.0, -beta_opp)) / np.abs(1.0 - beta_opp)
    return SAFETY_FACTOR * same, SAFETY_FACTOR * float(np.min(opposite_ratio))


@dataclass
class LowerBoundReport:
    a: float
    c_same_sign: float
    c_opposite_sign: float
    n_samples: int
    violations: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    worst_same: tuple = None
    worst_opposite: tuple = None

    def to_records(self):
        return [
            {'a': self.a, 'branch': 'same_sign', 'c_empirical': self.c_same_sign,
             'n_samples': self.n_samples, 'worst_sample': self.worst_same},
            {'a': self.a, 'branch': 'opposite_sign', 'c_empirical': self.c_opposite_sign,
             'n_samples': self.n_samples, 'worst_sample': self.worst_opposite},
        ]


def lower_bound_check(params, xi1, xi2, c_same=None, c_opposite=None):
    """Check |Omega| >= c |xi1|^{2+a} (same sign) and |Omega| >= c |xi1|^{1+a} |xi1+xi2| (opposite).

    Samples outside 1/4|xi1| <= |xi2| <= |xi1| are rejected with their region tag.
    Returns the largest constant each branch supports and every sample below the given
    constants (brute-force constants when none are given).
    """
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    if c_same is None or c_opposite is None:
        default_same, default_opposite = brute_force_constants(params)
        c_same = default_same if c_same is None else c_same
        c_opposite = default_opposite if c_opposite is None else c_opposite

    a1, a2 = np.abs(xi1), np.abs(xi2)
    inside = (a2 >= a1 / 4) & (a2 <= a1) & (a1 > 0)
    rejected = [(float(p), float(q), FrequencyPair(float(p), float(q)).comparability)
                for p, q in zip(xi1[~inside], xi2[~inside])]

    xi1, xi2 = xi1[inside], xi2[inside]
    big_omega = np.abs(resonance_fn(params, xi1, xi2))
    same = xi1 * xi2 >= 0
    opposite = ~same & (xi1 + xi2 != 0)

    rhs_same = np.abs(xi1[same]) ** (2 + params.a)
    rhs_opp = np.abs(xi1[opposite]) ** (1 + params.a) * np.abs(xi1[opposite] + xi2[opposite])
    ratio_same = big_omega[same] / rhs_same
    ratio_opp = big_omega[opposite] / rhs_opp

    violations = []
    for ratio, c, mask, branch in ((ratio_same, c_same, same, 'same_sign'),
                                   (ratio_opp, c_opposite, opposite, 'opposite_sign')):
        bad = np.flatnonzero(ratio < c)
        for idx in bad:
            violations.append((branch, float(xi1[mask][idx]), float(xi2[mask][idx]), float(ratio[idx])))

    def worst(ratio, mask):
        if ratio.size == 0:
            return float('inf'), None
        idx = int(np.argmin(ratio))
        return float(ratio[idx]), (float(xi1[mask][idx]), float(xi2[mask][idx]))

    c_same_emp, worst_same = worst(ratio_same, same)
    c_opp_emp, worst_opp = worst(ratio_opp, opposite)
    if violations:
        logger.debug("%d resonance bound violations at a=%s", len(violations), params.a)
    return LowerBoundReport(a=params.a, c_same_sign=c_same_emp, c_opposite_sign=c_opp_emp,
                            n_samples=int(inside.sum()), violations=violations, rejected=rejected,
                            worst_same=worst_same, worst_opposite=worst_opp)


def sample_region(rng, n_samples, xi_scale=1e3):
    """Random pairs in the comparability region, both sign patterns, magnitudes up to xi_scale"""
    xi1 = rng.uniform(-xi_scale, xi_scale, n_samples)
    beta = rng.uniform(0.25, 1.0, n_samples)
    sign = rng.choice([-1.0, 1.0], n_samples)
    return xi1, sign * beta * xi1


def jacobian_constant(params, n_beta=1001):
    """min |J| / |xi1|^{1+a} over |xi2| <= |xi1|/4 (xi1 = 1 by homogeneity)"""
    beta = np.linspace(-0.25, 0.25, n_beta)
    return float(np.min(jacobian(params, 1.0, beta)))


@dataclass
class LevelSetReport:
    measured: float
    bound: float
    interval_length: float
    out_of_regime: bool

    @property
    def constant(self):
        return self.measured / self.bound if self.bound > 0 else float('inf')


def _preimage_length(values, xi2, lower, upper, monotone):
    """Length of {xi2 : lower <= g(xi2) <= upper} on the scan"""
    if monotone:
        order = np.argsort(values)
        g_sorted, x_sorted = values[order], xi2[order]
        lo = np.clip(lower, g_sorted[0], g_sorted[-1])
        hi = np.clip(upper, g_sorted[0], g_sorted[-1])
        if hi <= lo:
            return 0.0
        return float(abs(np.interp(hi, g_sorted, x_sorted) - np.interp(lo, g_sorted, x_sorted)))
    h = float(xi2[1] - xi2[0])
    return h * int(np.count_nonzero((values >= lower) & (values <= upper)))


def levelset_measure(params, xi1, theta1, theta2, j, m1, n_scan=1 << 16):
    """Measure of {xi2 : |xi2| <= |xi1|/4, |theta1+theta2+omega(xi1)+omega(xi2)-omega(xi1+xi2)| ~ 2^j}.

    "~ 2^j" is read as the band [2^{j-1}, 2^{j+1}]. The function is monotone on the region,
    so the preimage is found by interpolating the scan; otherwise samples are counted.
    The bound is 2^j 2^{-m1 (1+a)}.
    """
    half = abs(xi1) / 4
    xi2 = np.linspace(-half, half, n_scan)
    g = theta1 + theta2 - resonance_fn(params, xi1, xi2)
    steps = np.diff(g)
    monotone = bool(np.all(steps < 0) or np.all(steps > 0))
    lower, upper = 2.0 ** (j - 1), 2.0 ** (j + 1)
    measured = (_preimage_length(g, xi2, lower, upper, monotone)
                + _preimage_length(g, xi2, -upper, -lower, monotone))
    interval = 2 * half
    bound = 2.0 ** j * 2.0 ** (-m1 * (1 + params.a))
    return LevelSetReport(measured=measured, bound=bound, interval_length=interval,
                          out_of_regime=measured >= 0.99 * interval or bound >= interval)


def levelset_derivative_constant(params, xi1, n_scan=4097):
    """min |g'(xi2)| / |xi1|^{1+a} over |xi2| <= |xi1|/4, with g' = omega'(xi2) - omega'(xi1+xi2)"""
    half = abs(xi1) / 4
    xi2 = np.linspace(-half, half, n_scan)
    derivative = omega_prime(params, xi2) - omega_prime(params, xi1 + xi2)
    return float(np.min(np.abs(derivative)) / abs(xi1) ** (1 + params.a))


@dataclass(frozen=True)
class AdmissibleInterval:
    lower: float
    upper: float

    @property
    def empty(self):
        return self.lower >= self.upper

    def contains(self, b):
        return self.lower < b < self.upper


def admissible_b(params):
    """(max(b0, (1-a)/(2(1+a))), 1/2)"""
    lower, upper = params.b_window
    return AdmissibleInterval(lower, upper)
