"""
Coarse-grained concentration profiles θ(x, t) ∝ t⁻¹ exp(−t g((x − x₀)/t)) along rays.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.eigen.tilt import as_points
from src.transforms.legendre import FLAG_BOUNDARY, RateTable, unit_vector
from src.utils.errors import ConfigurationError, CoverageError
from src.utils.tables import build_provenance, write_table

RateSource = Union[RateTable, Callable[[np.ndarray], Any]]
PROFILE_COLUMNS = ['t', 'radius', 'theta_norm', 'model']


def evaluate_rate(rate: RateSource, xi) -> np.ndarray:
    """
    g at the given ξ. Rate tables answer from their own nodes when every query is
    one of them, and by interpolation otherwise.
    """
    points = as_points(xi)
    if isinstance(rate, RateTable):
        frame = rate.frame
        lookup = {
            (round(x, 9) + 0.0, round(y, 9) + 0.0): (g, flag)
            for x, y, g, flag in frame[['xi_x', 'xi_y', 'g', 'flag']].itertuples(index=False)
        }
        keys = [(round(x, 9) + 0.0, round(y, 9) + 0.0) for x, y in points]
        if all(key in lookup for key in keys):
            hits = [lookup[key] for key in keys]
            if any(flag == FLAG_BOUNDARY for _, flag in hits):
                raise CoverageError("requested ξ nodes attain their maximum on the p-grid boundary")
            return np.array([g for g, _ in hits], dtype=float)
        return rate.evaluate(points)
    values = np.asarray(rate(points), dtype=float).reshape(-1)
    if len(values) != len(points):
        raise ConfigurationError(f"rate function returned {len(values)} values for {len(points)} points")
    return values


@dataclass
class ConcentrationProfile:
    """θ/θ* on a (time × radius) grid along one direction; each time row peaks at 1."""

    direction: np.ndarray
    radii: np.ndarray
    times: np.ndarray
    theta_norm: np.ndarray
    model: str
    source: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def positions(self) -> np.ndarray:
        return self.source + np.outer(self.radii, self.direction)

    def to_frame(self) -> pd.DataFrame:
        n_t, n_r = self.theta_norm.shape
        return pd.DataFrame({
            't': np.repeat(self.times, n_r),
            'radius': np.tile(self.radii, n_t),
            'theta_norm': self.theta_norm.ravel(),
            'model': self.model,
        })[PROFILE_COLUMNS]

    def to_csv(self, path: str, config: Optional[Dict[str, Any]] = None) -> str:
        metadata = {'direction': self.direction, 'source': self.source, 'model': self.model}
        return write_table(self.to_frame(), path, build_provenance('profile', metadata, config))


def _check_axes(times: Sequence[float], radii: Sequence[float]):
    times = np.asarray(times, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if not len(times) or not len(radii):
        raise ConfigurationError("profiles need at least one time and one radius")
    if np.any(times <= 0.0) or np.any(radii < 0.0):
        raise ConfigurationError("times must be positive and radii non-negative")
    return times, radii


def _normalise_rows(log_theta: np.ndarray) -> np.ndarray:
    return np.exp(log_theta - np.max(log_theta, axis=1, keepdims=True))


def concentration_profile(rate: RateSource, direction, times: Sequence[float], radii: Sequence[float],
                          source=(0.0, 0.0), model: str = 'large-deviation') -> ConcentrationProfile:
    e = unit_vector(direction)
    times, radii = _check_axes(times, radii)
    log_theta = np.empty((len(times), len(radii)))
    for i, t in enumerate(times):
        g = evaluate_rate(rate, np.outer(radii / t, e))
        log_theta[i] = -math.log(t) - t * g
    return ConcentrationProfile(e, radii, times, _normalise_rows(log_theta), model, as_points(source)[0])


def gaussian_profile(kappa: float, direction, times: Sequence[float], radii: Sequence[float],
                     source=(0.0, 0.0)) -> ConcentrationProfile:
    """Homogenised prediction exp(−|x − x₀|²/(4κt)), max-normalised per time."""
    if not kappa > 0.0:
        raise ConfigurationError(f"kappa must be positive, got {kappa}")
    e = unit_vector(direction)
    times, radii = _check_axes(times, radii)
    log_theta = -np.log(times)[:, None] - radii[None, :] ** 2 / (4.0 * kappa * times[:, None])
    return ConcentrationProfile(e, radii, times, _normalise_rows(log_theta), 'gaussian', as_points(source)[0])


def times_from_tau(tau: Sequence[float], kappa: float) -> np.ndarray:
    """Physical times for dimensionless τ = κ_eff t/(4π²)."""
    return 4.0 * math.pi ** 2 * np.asarray(tau, dtype=float) / kappa
