"""
Tilt-vector grids for the eigenvalue sweep.
"""

import math
from typing import List, Optional, Sequence

import numpy as np

from src.eigen.tilt import TiltVector
from src.utils.errors import ConfigurationError


def graded_radii(n_radial: int, p_max: float, grading: float = 1.0) -> np.ndarray:
    """n_radial positive radii p_max·(k/n)^grading; grading > 1 clusters nodes near the origin."""
    if n_radial < 1 or p_max <= 0.0 or grading <= 0.0:
        raise ConfigurationError(f"invalid radial grid (n={n_radial}, p_max={p_max}, grading={grading})")
    return p_max * (np.arange(1, n_radial + 1) / n_radial) ** grading


def sector_angles(n_angles: int, sector: str = 'full') -> np.ndarray:
    if n_angles < 1:
        raise ConfigurationError(f"n_angles must be positive, got {n_angles}")
    if sector == 'full':
        return 2.0 * math.pi * np.arange(n_angles) / n_angles
    if sector in ('quadrant', 'octant'):
        end = math.pi / 2.0 if sector == 'quadrant' else math.pi / 4.0
        return np.linspace(0.0, end, n_angles) if n_angles > 1 else np.array([0.0])
    raise ConfigurationError(f"unknown sector '{sector}'")


def polar_p_grid(n_angles: int, radii: Optional[Sequence[float]] = None, n_radial: Optional[int] = None,
                 p_max: float = 3.0, grading: float = 1.0, sector: str = 'full',
                 include_origin: bool = True) -> List[TiltVector]:
    """
    Polar grid ordered ray by ray with increasing |p| along each ray.

    sector 'full' spreads n_angles over [0, 2π); 'quadrant' and 'octant' place them
    on [0, π/2] and [0, π/4] with both end angles included.
    """
    if n_angles < 1:
        raise ConfigurationError(f"n_angles must be positive, got {n_angles}")
    if radii is None:
        if n_radial is None:
            raise ConfigurationError("polar grid needs either radii or n_radial")
        radii = graded_radii(n_radial, p_max, grading)
    radii = sorted(float(r) for r in radii if r > 0.0)

    grid = [TiltVector()] if include_origin else []
    for angle in sector_angles(n_angles, sector):
        grid.extend(TiltVector.from_polar(radius, float(angle)) for radius in radii)
    return grid


def square_p_grid(n: int, p_max: float, quadrant: bool = True) -> List[TiltVector]:
    """n×n tensor grid over [0, p_max]² (or [−p_max, p_max]²), row-major in p."""
    if n < 1 or p_max < 0.0:
        raise ConfigurationError(f"invalid square grid (n={n}, p_max={p_max})")
    low = 0.0 if quadrant else -p_max
    axis = np.linspace(low, p_max, n) if n > 1 else np.array([low])
    return [TiltVector(float(p), float(q)) for p in axis for q in axis]
