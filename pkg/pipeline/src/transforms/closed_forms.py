"""
Closed-form effective diffusivities and the quadratic rate functions they induce.

All vector arguments accept a TiltVector, a pair, or an (n, 2) array; results are
floats for a single vector and arrays otherwise.
"""

import math
from typing import Union

import numpy as np

from src.eigen.tilt import as_points, is_single_vector
from src.geometry.cell import LATTICE_HALF_PERIOD
from src.utils.errors import ConfigurationError
from src.utils.logger import get_logger

PI = LATTICE_HALF_PERIOD
CLOSE_PACKING_SIGMA = math.pi / 4.0
DILUTE_WARNING_SIGMA = 0.05

Rate = Union[float, np.ndarray]


def _squared_norms(vectors) -> Rate:
    points = as_points(vectors)
    squared = np.sum(points ** 2, axis=1)
    return float(squared[0]) if is_single_vector(vectors) else squared


def quadratic_g(kappa_eff: float, xi) -> Rate:
    """|ξ|²/(4κ_eff)"""
    if not kappa_eff > 0.0:
        raise ConfigurationError(f"kappa_eff must be positive, got {kappa_eff}")
    return _squared_norms(xi) / (4.0 * kappa_eff)


def quadratic_f(kappa_eff: float, tilt) -> Rate:
    """κ_eff|p|², the conjugate of quadratic_g."""
    if not kappa_eff > 0.0:
        raise ConfigurationError(f"kappa_eff must be positive, got {kappa_eff}")
    return kappa_eff * _squared_norms(tilt)


def _check_sigma(sigma: float) -> None:
    if not 0.0 <= sigma < CLOSE_PACKING_SIGMA:
        raise ConfigurationError(f"area fraction must lie in [0, π/4), got {sigma}")


def maxwell_kappa(sigma: float) -> float:
    _check_sigma(sigma)
    return 1.0 - sigma


def gap_coefficient(epsilon: float) -> float:
    """Gap conductance α = √(2ε/π³) of a narrow gap of half-width ε."""
    if not epsilon > 0.0:
        raise ConfigurationError(f"gap half-width must be positive, got {epsilon}")
    return math.sqrt(2.0 * epsilon / PI ** 3)


def keller_kappa(sigma: float) -> float:
    """Dense-limit diffusivity 2(π/4 − σ)^½ / (π^{3/2}(1 − π/4))."""
    _check_sigma(sigma)
    return 2.0 * math.sqrt(CLOSE_PACKING_SIGMA - sigma) / (PI ** 1.5 * (1.0 - PI / 4.0))


def keller_kappa_eps(epsilon: float) -> float:
    return gap_coefficient(epsilon) / (1.0 - PI / 4.0)


def _warn_if_not_dilute(sigma: float) -> None:
    if sigma > DILUTE_WARNING_SIGMA:
        get_logger().warning(f"⚠️ Dilute approximation used at σ={sigma:.3g} (> {DILUTE_WARNING_SIGMA})")


def dilute_g(sigma: float, xi) -> Rate:
    _warn_if_not_dilute(sigma)
    return quadratic_g(maxwell_kappa(sigma), xi)


def dilute_f(sigma: float, tilt) -> Rate:
    _warn_if_not_dilute(sigma)
    return quadratic_f(maxwell_kappa(sigma), tilt)
