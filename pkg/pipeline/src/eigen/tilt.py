"""
Dual variable p = (p, q) of the rate function.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.utils.errors import ConfigurationError


@dataclass(frozen=True)
class TiltVector:
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ConfigurationError(f"tilt components must be finite, got ({self.p}, {self.q})")
        object.__setattr__(self, 'p', float(self.p))
        object.__setattr__(self, 'q', float(self.q))

    @classmethod
    def from_polar(cls, radius: float, angle: float) -> 'TiltVector':
        return cls(radius * math.cos(angle), radius * math.sin(angle))

    @property
    def norm_sq(self) -> float:
        return self.p * self.p + self.q * self.q

    @property
    def norm(self) -> float:
        return math.hypot(self.p, self.q)

    @property
    def angle(self) -> float:
        return math.atan2(self.q, self.p)

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.q])

    def __neg__(self) -> 'TiltVector':
        return TiltVector(-self.p, -self.q)

    def scaled(self, factor: float) -> 'TiltVector':
        return TiltVector(factor * self.p, factor * self.q)

    def canonical(self) -> 'TiltVector':
        """Representative in the octant 0 ≤ q ≤ p under the square lattice's symmetry group."""
        a, b = abs(self.p), abs(self.q)
        return TiltVector(max(a, b), min(a, b))


def as_points(values) -> np.ndarray:
    """
    Coerce a TiltVector, a sequence of TiltVectors, a pair or an (..., 2) array
    into an (n, 2) float array.
    """
    if isinstance(values, TiltVector):
        return values.as_array()[None, :]
    if isinstance(values, (list, tuple)) and values and isinstance(values[0], TiltVector):
        return np.array([[t.p, t.q] for t in values], dtype=float)
    points = np.asarray(values, dtype=float)
    if points.shape == (2,):
        return points[None, :]
    if points.ndim < 1 or points.shape[-1] != 2:
        raise ConfigurationError(f"expected 2-vectors, got an array of shape {points.shape}")
    return points.reshape(-1, 2)


def is_single_vector(values) -> bool:
    if isinstance(values, TiltVector):
        return True
    if isinstance(values, (list, tuple)) and values and isinstance(values[0], TiltVector):
        return False
    return np.shape(values) == (2,)
