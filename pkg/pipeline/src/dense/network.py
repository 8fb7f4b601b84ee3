"""
Discrete-network model of the dense lattice: voids joined by narrow gaps of
conductance α, giving closed-form f_d(p) and its conjugate g_d(ξ).
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.eigen.tilt import as_points, is_single_vector
from src.geometry.cell import ASTROID_AREA, CellSpec, LATTICE_HALF_PERIOD
from src.transforms.closed_forms import Rate, gap_coefficient
from src.utils.errors import ConfigurationError

PI = LATTICE_HALF_PERIOD


@dataclass(frozen=True)
class NetworkParams:
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < PI:
            raise ConfigurationError(f"gap half-width must lie in (0, π), got {self.epsilon}")

    @classmethod
    def from_spec(cls, spec: CellSpec) -> 'NetworkParams':
        return cls(spec.epsilon)

    @property
    def alpha(self) -> float:
        return gap_coefficient(self.epsilon)

    @property
    def area(self) -> float:
        return ASTROID_AREA

    @property
    def beta(self) -> float:
        return self.area / (4.0 * PI * self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        return {'epsilon': self.epsilon, 'alpha': self.alpha, 'area': self.area, 'beta': self.beta}


def _result(values: np.ndarray, original) -> Rate:
    return float(values[0]) if is_single_vector(original) else values


def network_f(tilt, params: NetworkParams) -> Rate:
    """(4α/𝒜)(sinh²(πp) + sinh²(πq))"""
    points = as_points(tilt)
    values = 4.0 * params.alpha / params.area * np.sum(np.sinh(PI * points) ** 2, axis=1)
    return _result(values, tilt)


def _s(x: np.ndarray) -> np.ndarray:
    """S(x) = 1 + x asinh x − √(1 + x²), evaluated without cancellation near 0."""
    root = np.sqrt(1.0 + x * x)
    return x * np.arcsinh(x) - x * x / (1.0 + root)


def network_g(xi, params: NetworkParams) -> Rate:
    """(2α/𝒜)(S(βξ) + S(βη))"""
    points = as_points(xi)
    values = 2.0 * params.alpha / params.area * np.sum(_s(params.beta * points), axis=1)
    return _result(values, xi)


def network_kappa(params: NetworkParams) -> float:
    return 4.0 * math.pi ** 2 * params.alpha / params.area
