"""
Perforated periodic cell and dense-limit astroid specifications.

All lengths are nondimensional: the lattice period is 2π, so the cell ω is the
square [-π, π]² with a disk of radius a at the origin, and ω' is the same square
shifted by half a period (quarter disks at the corners, void in the middle).
"""

import math
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Any, Dict, Union

import numpy as np

from src.utils.errors import ConfigurationError


LATTICE_HALF_PERIOD = math.pi
CELL_SIDE = 2.0 * math.pi
CELL_AREA = CELL_SIDE ** 2
# Area of the ε → 0 void region (square minus four quarter disks of radius π)
ASTROID_AREA = math.pi ** 2 * (4.0 - math.pi)

ArrayLike = Union[float, np.ndarray]


class CellVariant(str, Enum):
    OMEGA = 'omega'                # obstacle-centred cell
    OMEGA_PRIME = 'omega_prime'    # void-centred (astroid) cell


@dataclass(frozen=True)
class CellSpec:
    """Obstacle radius plus cell choice. a = 0 denotes the obstacle-free periodic square."""

    obstacle_radius: float
    cell_variant: CellVariant = CellVariant.OMEGA

    def __post_init__(self):
        a = self.obstacle_radius
        if not (math.isfinite(a) and 0.0 <= a < math.pi):
            raise ConfigurationError(f"obstacle radius must satisfy 0 <= a < pi, got {a}")
        if not isinstance(self.cell_variant, CellVariant):
            object.__setattr__(self, 'cell_variant', CellVariant(self.cell_variant))
        if self.cell_variant is CellVariant.OMEGA_PRIME and a == 0.0:
            raise ConfigurationError("the omega_prime cell needs a positive obstacle radius")

    @classmethod
    def from_epsilon(cls, epsilon: float, cell_variant: CellVariant = CellVariant.OMEGA) -> 'CellSpec':
        if not 0.0 < epsilon <= math.pi:
            raise ConfigurationError(f"gap half-width must satisfy 0 < eps <= pi, got {epsilon}")
        return cls(math.pi - epsilon, cell_variant)

    @property
    def epsilon(self) -> float:
        """Gap half-width ε = π − a."""
        return math.pi - self.obstacle_radius

    @property
    def sigma(self) -> float:
        return area_fraction(self)

    @property
    def has_obstacle(self) -> bool:
        return self.obstacle_radius > 0.0

    def fluid_area(self) -> float:
        """Exact area of the perforated cell, 4π² − πa²."""
        return CELL_AREA - math.pi * self.obstacle_radius ** 2

    def to_dict(self) -> Dict[str, Any]:
        return {'obstacle_radius': self.obstacle_radius, 'cell_variant': self.cell_variant.value}


@dataclass(frozen=True)
class AstroidSpec:
    """Trimmed ε → 0 void region of ω'; cusps are cut a distance δ from their tips."""

    trim_distance: float = 0.01
    mesh_size: float = 0.1
    refinement_ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.trim_distance < 0.5:
            raise ConfigurationError(f"trim distance must satisfy 0 < delta < 0.5, got {self.trim_distance}")
        if self.mesh_size <= 0.0:
            raise ConfigurationError(f"mesh size must be positive, got {self.mesh_size}")
        if not 0.0 < self.refinement_ratio <= 1.0:
            raise ConfigurationError(f"refinement ratio must lie in (0, 1], got {self.refinement_ratio}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def area_fraction(spec: CellSpec) -> float:
    """Obstacle area fraction σ = a²/(4π)."""
    return spec.obstacle_radius ** 2 / (4.0 * math.pi)


def sigma_from_epsilon(epsilon: float) -> float:
    return (math.pi - epsilon) ** 2 / (4.0 * math.pi)


def epsilon_from_sigma(sigma: float) -> float:
    if not 0.0 <= sigma < math.pi / 4.0:
        raise ConfigurationError(f"area fraction must satisfy 0 <= sigma < pi/4, got {sigma}")
    return math.pi - math.sqrt(4.0 * math.pi * sigma)


def gap_halfwidth(x: ArrayLike, epsilon: float) -> ArrayLike:
    """
    Half-width h_ε(x) = π − √((π−ε)² − x²) of the gap between two neighbouring
    obstacles, measured from the gap centre along the gap (0 ≤ |x| ≤ π − ε).
    """
    x_arr = np.abs(np.asarray(x, dtype=float))
    limit = math.pi - epsilon
    if np.any(x_arr > limit * (1.0 + 1e-12)):
        raise ConfigurationError(f"gap coordinate must satisfy |x| <= pi - eps = {limit}")
    value = math.pi - np.sqrt(np.clip(limit ** 2 - x_arr ** 2, 0.0, None))
    return float(value) if np.ndim(value) == 0 else value


def gap_halfwidth_parabolic(x: ArrayLike, epsilon: float) -> ArrayLike:
    """Small-ε approximation x²/(2π) + ε of the gap half-width."""
    value = np.asarray(x, dtype=float) ** 2 / (2.0 * math.pi) + epsilon
    return float(value) if np.ndim(value) == 0 else value


def astroid_halfwidth(s: ArrayLike) -> ArrayLike:
    """Half-width h₀(s) = π − √(π² − s²) of an astroid cusp at distance s from its tip."""
    s_arr = np.clip(np.abs(np.asarray(s, dtype=float)), 0.0, math.pi)
    value = math.pi - np.sqrt(math.pi ** 2 - s_arr ** 2)
    return float(value) if np.ndim(value) == 0 else value
