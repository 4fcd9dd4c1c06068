import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from gbolab.utils.errors import FitDomainError

logger = logging.getLogger(__name__)

MIN_POINTS = 4


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float

    def to_record(self):
        return {'slope': self.slope, 'intercept': self.intercept, 'r2': self.r2}


def _linear_fit(x, y):
    if np.ptp(y) == 0.0:
        # linregress reports r = 0 for a flat series; a constant is fitted exactly
        return FitResult(0.0, float(y[0]), 1.0)
    result = stats.linregress(x, y)
    return FitResult(float(result.slope), float(result.intercept), float(result.rvalue ** 2))


def fit_exponent(n_values, values, min_points=MIN_POINTS):
    """Least squares of log2(value) against log2(N)"""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if n_values.size != values.size:
        raise FitDomainError(f"series lengths differ: {n_values.size} vs {values.size}")
    if n_values.size < min_points:
        raise FitDomainError(f"need at least {min_points} points, got {n_values.size}")
    if np.any(values <= 0) or np.any(n_values <= 0) or not np.all(np.isfinite(values)):
        raise FitDomainError("exponent fits need positive, finite values")
    return _linear_fit(np.log2(n_values), np.log2(values))


def fit_log_growth(n_values, values, min_points=MIN_POINTS):
    """Least squares of value against log2(N), for sums that grow like log N"""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if n_values.size < min_points:
        raise FitDomainError(f"need at least {min_points} points, got {n_values.size}")
    if np.any(n_values <= 0) or not np.all(np.isfinite(values)):
        raise FitDomainError("log-growth fits need positive N and finite values")
    return _linear_fit(np.log2(n_values), values)
