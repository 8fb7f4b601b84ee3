"""
Extreme-tail rate function from obstacle-avoiding shortest paths in the dense lattice.
"""

import math

import numpy as np

from src.eigen.tilt import as_points, is_single_vector
from src.transforms.closed_forms import Rate


def geodesic_distance(xi) -> Rate:
    """d(x, y) = π(x + y)/4 + (1 − π/4)|x − y| on the first quadrant, extended by symmetry."""
    points = np.abs(as_points(xi))
    x, y = points[:, 0], points[:, 1]
    distance = math.pi * (x + y) / 4.0 + (1.0 - math.pi / 4.0) * np.abs(x - y)
    return float(distance[0]) if is_single_vector(xi) else distance


def geodesic_rate(xi) -> Rate:
    """d(ξ)²/4"""
    return geodesic_distance(xi) ** 2 / 4.0
