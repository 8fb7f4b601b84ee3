"""
Dense-limit eigenvalue from the transcendental dispersion relation

    (D₃c_p − D₁ − γ)(D₃c_q − D₁ − γ) − D₂²(c_p − 1)(c_q − 1) = 0,
    c_p = cosh 2πp,  c_q = cosh 2πq,  γ = (2πα)⁻¹,

with D_i = D_i(f) from a DTable (or the small-f law D_i = 1/(π𝒜f)).
Setting q = 0 gives cosh 2πp = (D₁(f) + γ)/D₃(f) on the axis.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from src.dense.network import NetworkParams, network_f
from src.eigen.ftable import FTable
from src.eigen.tilt import TiltVector
from src.geometry.cell import ASTROID_AREA, LATTICE_HALF_PERIOD
from src.utils.errors import ObstacleLDError, RootBracketError, TableRangeError
from src.utils.logger import get_logger

PI = LATTICE_HALF_PERIOD
SMALLEST_F = 1e-300


def small_f_dtable_law(f0: float, area: float = ASTROID_AREA) -> Tuple[float, float, float]:
    """D₁ = D₂ = D₃ = 1/(π𝒜f₀)"""
    d = 1.0 / (PI * area * f0)
    return d, d, d


class SmallFLaw:
    """D provider implementing the small-f₀ asymptote on (0, ∞)."""

    f_bounds = (SMALLEST_F, math.inf)

    def __init__(self, area: float = ASTROID_AREA):
        self.area = area

    def evaluate(self, f: float) -> Tuple[float, float, float]:
        return small_f_dtable_law(f, self.area)


def dispersion_determinant(tilt: TiltVector, d1: float, d2: float, d3: float, alpha: float) -> float:
    c_p = math.cosh(2.0 * PI * tilt.p)
    c_q = math.cosh(2.0 * PI * tilt.q)
    gamma = 1.0 / (2.0 * PI * alpha)
    return (d3 * c_p - d1 - gamma) * (d3 * c_q - d1 - gamma) - d2 * d2 * (c_p - 1.0) * (c_q - 1.0)


def transcendental_residual(f: float, tilt: TiltVector, dtable, params: NetworkParams) -> float:
    d1, d2, d3 = dtable.evaluate(f)
    return dispersion_determinant(tilt, d1, d2, d3, params.alpha)


def on_axis_cosh(f: float, dtable, params: NetworkParams) -> float:
    """cosh 2πp solving the relation at q = 0."""
    d1, _, d3 = dtable.evaluate(f)
    return (d1 + 1.0 / (2.0 * PI * params.alpha)) / d3


@dataclass
class DenseFResult:
    tilt: TiltVector
    f: float
    residual: float
    bracket: Tuple[float, float]
    trace: List[Tuple[float, float]] = field(default_factory=list, repr=False)


def _bracket(residual, guess: float, low: float, high: float,
             max_expansions: int) -> Tuple[float, float, List[Tuple[float, float]]]:
    """Expand geometrically from guess to [lo, hi] with residual(lo) < 0 ≤ residual(hi)."""
    trace: List[Tuple[float, float]] = []

    def evaluate(f):
        value = residual(f)
        trace.append((f, value))
        return value

    value = evaluate(guess)
    if value < 0.0:
        lo, hi = guess, guess
        for _ in range(max_expansions):
            if hi >= high:
                raise TableRangeError(f"root lies above the tabulated range (f > {high:.6g})")
            hi = min(2.0 * hi, high)
            if evaluate(hi) >= 0.0:
                return lo, hi, trace
            lo = hi
    else:
        lo, hi = guess, guess
        for _ in range(max_expansions):
            if lo <= low:
                raise TableRangeError(f"root lies below the tabulated range (f < {low:.6g})")
            lo = max(0.5 * lo, low)
            if evaluate(lo) < 0.0:
                return lo, hi, trace
            hi = lo
    raise RootBracketError(f"no sign change found after {max_expansions} expansions from f={guess:.6g}", trace)


def transcendental_solve(tilt: TiltVector, dtable, params: NetworkParams, f_guess: Optional[float] = None,
                         max_expansions: int = 80) -> DenseFResult:
    """
    Root f > 0 of the dispersion relation at fixed tilt, bracketed outward from
    f_guess (default: the network-model value).
    """
    if tilt.norm == 0.0:
        return DenseFResult(tilt, 0.0, 0.0, (0.0, 0.0))
    low, high = dtable.f_bounds
    guess = f_guess if f_guess is not None and f_guess > 0.0 else network_f(tilt, params)
    guess = min(max(guess, low), high)

    def residual(f):
        return transcendental_residual(f, tilt, dtable, params)

    lo, hi, trace = _bracket(residual, guess, low, high, max_expansions)
    if trace[-1][1] == 0.0:
        root = trace[-1][0]
    else:
        root = brentq(residual, lo, hi, xtol=1e-15 * hi, rtol=1e-14, maxiter=200)
    return DenseFResult(tilt, float(root), float(residual(root)), (lo, hi), trace)


def _solve_ray(tilts: Sequence[TiltVector], dtable, params: NetworkParams, first_guess: Optional[float],
               continue_on_error: bool) -> List[Dict[str, Any]]:
    rows = []
    guess = first_guess
    for tilt in tilts:
        try:
            result = transcendental_solve(tilt, dtable, params, f_guess=guess)
            rows.append({'p': tilt.p, 'q': tilt.q, 'f': result.f, 'residual': abs(result.residual),
                         'iterations': len(result.trace), 'status': 'ok', 'error': ''})
            guess = result.f
        except (ObstacleLDError, ArithmeticError, ValueError) as e:
            if not continue_on_error:
                raise
            get_logger().debug(f"Dense solve failed at p=({tilt.p:.4g}, {tilt.q:.4g}): {e}")
            rows.append({'p': tilt.p, 'q': tilt.q, 'f': float('nan'), 'residual': float('nan'),
                         'iterations': 0, 'status': 'failed', 'error': str(e)})
    return rows


def _solve_rays(rays: Sequence[Sequence[TiltVector]], dtable, params: NetworkParams,
                continue_on_error: bool) -> List[Dict[str, Any]]:
    """Neighbouring rays in order, each starting from the previous ray's first root."""
    rows: List[Dict[str, Any]] = []
    previous_first: Optional[float] = None
    for ray in rays:
        ray_rows = _solve_ray(ray, dtable, params, previous_first, continue_on_error)
        if ray_rows and ray_rows[0]['status'] == 'ok':
            previous_first = ray_rows[0]['f']
        rows.extend(ray_rows)
    return rows


def transcendental_ftable(dtable, params: NetworkParams, angles: Sequence[float], radii: Sequence[float],
                          max_workers: int = 1, continue_on_error: bool = True) -> FTable:
    """
    Dense-asymptotic f over a polar grid (origin included). Each ray is solved with
    increasing |p|, continuing from the previous root, and starts from the first root
    of the neighbouring ray. With several workers the rays are split into contiguous
    chunks, one per worker, and the chaining runs within each chunk.
    """
    logger = get_logger()
    radii = sorted(float(r) for r in radii if r > 0.0)
    rays = [[TiltVector.from_polar(r, float(angle)) for r in radii] for angle in angles]
    rows: List[Dict[str, Any]] = [{'p': 0.0, 'q': 0.0, 'f': 0.0, 'residual': 0.0, 'iterations': 0,
                                   'status': 'ok', 'error': ''}]
    n_chunks = max(1, min(max_workers, len(rays)))
    if n_chunks > 1:
        bounds = np.linspace(0, len(rays), n_chunks + 1).astype(int)
        chunks = [rays[start:stop] for start, stop in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=n_chunks) as executor:
            for chunk_rows in executor.map(lambda chunk: _solve_rays(chunk, dtable, params, continue_on_error),
                                           chunks):
                rows.extend(chunk_rows)
    else:
        rows.extend(_solve_rays(rays, dtable, params, continue_on_error))

    frame = pd.DataFrame(rows)
    n_failed = int(np.sum(frame['status'] != 'ok'))
    if n_failed:
        logger.warning(f"⚠️ {n_failed}/{len(frame)} dense-asymptotic nodes failed (outside the D table range?)")
    metadata = {
        'model': 'dense_asymptotic',
        'network': params.to_dict(),
        'd_source': getattr(dtable, 'metadata', {'law': 'small_f'}),
        'n_failed': n_failed,
    }
    return FTable(frame, metadata)
