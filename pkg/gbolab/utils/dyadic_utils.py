import logging
import math
from dataclasses import dataclass

import numpy as np

from gbolab.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

MAX_PARTITION_DEFECT = 0.05


def smoothstep(t):
    """C^3 polynomial ramp from 0 at t<=0 to 1 at t>=1"""
    t = np.clip(t, 0.0, 1.0)
    return t ** 4 * (35.0 - 84.0 * t + 70.0 * t ** 2 - 20.0 * t ** 3)


def bump(z):
    """Even bump: 1 on [-1/2, 1/2], 0 outside (-1, 1)"""
    z = np.abs(np.asarray(z, dtype=float))
    return smoothstep(2.0 * (1.0 - z))


def ring(z):
    """chi(z) = bump(z/2) - bump(z), supported in 1/2 < |z| < 2"""
    z = np.asarray(z, dtype=float)
    return bump(z / 2.0) - bump(z)


@dataclass(frozen=True)
class DyadicDecomposition:
    """Modulation layers chi_j(lambda - omega(xi)).

    Layer 0 is bump(z/2), identically 1 on |z| <= 1. Layer j >= 1 is ring(2^{-j} z).
    The top layer j_max collects everything beyond 2^{j_max - 1}, so the layers sum to 1.
    """
    j_max: int

    def __post_init__(self):
        if self.j_max < 1:
            raise ConfigurationError(f"j_max must be at least 1, got {self.j_max}")

    @classmethod
    def for_extent(cls, max_modulation):
        """Smallest decomposition whose tail layer starts beyond twice max_modulation"""
        j_max = max(1, int(math.ceil(math.log2(max(max_modulation, 1.0)))) + 2)
        decomposition = cls(j_max)
        defect = decomposition.partition_defect()
        if defect > MAX_PARTITION_DEFECT:
            raise ConfigurationError(f"dyadic partition defect {defect:.3g} exceeds {MAX_PARTITION_DEFECT}")
        return decomposition

    def layer(self, j, z):
        z = np.asarray(z, dtype=float)
        if j == 0:
            return bump(z / 2.0)
        if j < self.j_max:
            return ring(z / 2.0 ** j)
        return 1.0 - bump(z / 2.0 ** self.j_max)

    def layers(self):
        return range(self.j_max + 1)

    def partition_defect(self, n_samples=4097):
        """max |sum_j chi_j(z) - 1| over |z| <= 2^{j_max - 1}"""
        z = np.linspace(-(2.0 ** (self.j_max - 1)), 2.0 ** (self.j_max - 1), n_samples)
        total = np.zeros_like(z)
        for j in self.layers():
            total += self.layer(j, z)
        return float(np.max(np.abs(total - 1.0)))
