"""
FKPP front speeds c(e) = inf_{p>0} (f(pe) + α_r)/p and the dual level-set form g(c e) = α_r.
"""

from dataclasses import dataclass
from typing import Any, Callable, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CloughTocher2DInterpolator
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import ConvexHull

from src.dispersion.profiles import RateSource, evaluate_rate
from src.eigen.ftable import FTable
from src.transforms.legendre import unit_vector
from src.utils.errors import ConfigurationError, RootBracketError, TableRangeError
from src.utils.logger import get_logger

DEFAULT_P_LIMIT = 20.0


@dataclass
class FrontSpeed:
    direction: np.ndarray
    alpha_r: float
    speed: float
    p_star: float
    level_set_speed: Optional[float] = None

    @property
    def dual_mismatch(self) -> float:
        if self.level_set_speed is None:
            return float('nan')
        return abs(self.speed - self.level_set_speed) / self.speed


def _ray_limit(points: np.ndarray, e: np.ndarray) -> float:
    """Distance from the origin to the hull of the sampled points along e."""
    equations = ConvexHull(points).equations
    towards = equations[:, :2] @ e
    outward = towards > 0.0
    if not np.any(outward):
        return float('inf')
    return float(np.min(-equations[outward, 2] / towards[outward]))


def _ray_function(f_eval: Union[FTable, Callable[[np.ndarray], Any]], e: np.ndarray,
                  p_limit: Optional[float]) -> Tuple[Callable[[float], float], float]:
    if isinstance(f_eval, FTable):
        points = f_eval.points()
        interpolator = CloughTocher2DInterpolator(points, f_eval.values())
        limit = _ray_limit(points, e) * (1.0 - 1e-9)
        limit = limit if p_limit is None else min(limit, p_limit)

        def along(p: float) -> float:
            value = float(interpolator(p * e[None, :])[0])
            if not np.isfinite(value):
                raise TableRangeError(f"p = {p:.6g} along {tuple(e)} lies outside the f-table")
            return value
        return along, limit

    def along_callable(p: float) -> float:
        return float(np.ravel(f_eval(p * e[None, :]))[0])
    return along_callable, DEFAULT_P_LIMIT if p_limit is None else p_limit


def front_speed_from_rate(rate: RateSource, alpha_r: float, direction, max_doublings: int = 60) -> float:
    """Root c of g(c e) = α_r, bracketed by doubling from c = 1."""
    if not alpha_r > 0.0:
        raise ConfigurationError(f"reaction rate must be positive, got {alpha_r}")
    e = unit_vector(direction)

    def excess(c: float) -> float:
        return float(evaluate_rate(rate, c * e[None, :])[0]) - alpha_r

    high = 1.0
    trace = []
    for _ in range(max_doublings):
        value = excess(high)
        trace.append((high, value))
        if value >= 0.0:
            return float(brentq(excess, 0.0, high, xtol=1e-14 * high, rtol=1e-14))
        high *= 2.0
    raise RootBracketError(f"g(c e) stays below α_r={alpha_r} up to c={high:.3g}", trace)


def fkpp_front_speed(f_eval: Union[FTable, Callable[[np.ndarray], Any]], alpha_r: float, direction,
                     p_limit: Optional[float] = None, rate: Optional[RateSource] = None) -> FrontSpeed:
    """Minimise (f(pe) + α_r)/p over (0, p_limit]; a minimiser at p_limit is a range error."""
    if not alpha_r > 0.0:
        raise ConfigurationError(f"reaction rate must be positive, got {alpha_r}")
    e = unit_vector(direction)
    along, limit = _ray_function(f_eval, e, p_limit)
    lower = 1e-9 * limit

    def objective(p: float) -> float:
        return (along(p) + alpha_r) / p

    result = minimize_scalar(objective, bounds=(lower, limit), method='bounded',
                             options={'xatol': 1e-12 * limit, 'maxiter': 500})
    p_star = float(result.x)
    if p_star >= limit * (1.0 - 1e-6):
        raise TableRangeError(f"front-speed infimum reaches the sampled limit |p| = {limit:.4g} along {tuple(e)}")
    speed = FrontSpeed(e, alpha_r, float(result.fun), p_star)
    if rate is not None:
        speed.level_set_speed = front_speed_from_rate(rate, alpha_r, e)
        get_logger().debug(f"Front speed {speed.speed:.8f} vs level set {speed.level_set_speed:.8f}")
    return speed
