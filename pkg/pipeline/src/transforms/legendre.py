"""
Discrete Legendre transform between a sampled f(p) and the rate function g(ξ).

For each ξ the supremum of p·ξ − f(p) is first taken over the table nodes. Around
the discrete maximiser a quadratic model of f is fitted to the nearest nodes and
one Newton step moves the maximiser off the grid. Maxima attained on the convex
hull of the sampled nodes are flagged 'boundary' and never extrapolated.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import CloughTocher2DInterpolator
from scipy.spatial import ConvexHull, QhullError, cKDTree

from src.eigen.ftable import FTable
from src.eigen.tilt import as_points, is_single_vector
from src.utils.errors import ConfigurationError, CoverageError, TableRangeError
from src.utils.logger import get_logger
from src.utils.tables import build_provenance, read_table, write_table


RATE_COLUMNS = ['xi_x', 'xi_y', 'g', 'p_max_x', 'p_max_y', 'flag']
FLAG_OK = 'ok'
FLAG_UNREFINED = 'unrefined'
FLAG_BOUNDARY = 'boundary'
DEFAULT_NEIGHBOURS = 12
QUERY_CHUNK = 64


@dataclass
class RateTable:
    """One row per ξ node with g(ξ), the maximising p and a flag."""

    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)
    _interpolator: Optional[CloughTocher2DInterpolator] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        frame = self.frame.copy()
        if 'flag' not in frame.columns:
            frame['flag'] = FLAG_OK
        frame['flag'] = frame['flag'].fillna(FLAG_OK)
        self.frame = frame[RATE_COLUMNS].reset_index(drop=True)

    def __len__(self) -> int:
        return len(self.frame)

    def points(self) -> np.ndarray:
        return self.frame[['xi_x', 'xi_y']].to_numpy(dtype=float)

    def values(self) -> np.ndarray:
        return self.frame['g'].to_numpy(dtype=float)

    def maximisers(self) -> np.ndarray:
        return self.frame[['p_max_x', 'p_max_y']].to_numpy(dtype=float)

    @property
    def interior_frame(self) -> pd.DataFrame:
        return self.frame[self.frame['flag'] != FLAG_BOUNDARY]

    @property
    def n_boundary(self) -> int:
        return int(np.sum(self.frame['flag'] == FLAG_BOUNDARY))

    def value_at(self, xi, tolerance: float = 1e-9) -> float:
        target = as_points(xi)[0]
        distance = np.max(np.abs(self.points() - target), axis=1)
        if not len(distance) or np.min(distance) > tolerance:
            raise TableRangeError(f"ξ = {tuple(target)} is not a node of the rate table")
        return float(self.values()[int(np.argmin(distance))])

    def evaluate(self, xi) -> np.ndarray:
        """C¹ interpolation of g over the non-boundary nodes; queries outside their hull raise CoverageError."""
        if self._interpolator is None:
            interior = self.interior_frame
            try:
                self._interpolator = CloughTocher2DInterpolator(
                    interior[['xi_x', 'xi_y']].to_numpy(dtype=float), interior['g'].to_numpy(dtype=float)
                )
            except (QhullError, ValueError) as e:
                raise CoverageError(f"rate table nodes do not span a 2D region: {e}") from e
        points = as_points(xi)
        values = self._interpolator(points)
        outside = ~np.isfinite(values)
        if np.any(outside):
            first = points[np.argmax(outside)]
            raise CoverageError(
                f"{int(np.sum(outside))} ξ values outside the rate table hull (first at {tuple(first)})"
            )
        return values

    def to_csv(self, path: str, config: Optional[Dict[str, Any]] = None) -> str:
        return write_table(self.frame, path, build_provenance('rate_table', self.metadata, config))

    @classmethod
    def read_csv(cls, path: str) -> 'RateTable':
        frame, provenance = read_table(path)
        return cls(frame, provenance.get('metadata', {}))


def unit_vector(direction) -> np.ndarray:
    vector = as_points(direction)[0]
    norm = float(np.hypot(*vector))
    if norm == 0.0 or not np.isfinite(norm):
        raise ConfigurationError(f"direction must be a non-zero finite vector, got {tuple(vector)}")
    return vector / norm


def square_xi_grid(n: int, xi_max: float, quadrant: bool = False) -> np.ndarray:
    if n < 1 or xi_max < 0.0:
        raise ConfigurationError(f"invalid ξ grid (n={n}, xi_max={xi_max})")
    axis = np.linspace(0.0 if quadrant else -xi_max, xi_max, n) if n > 1 else np.array([0.0])
    xx, yy = np.meshgrid(axis, axis, indexing='ij')
    return np.column_stack([xx.ravel(), yy.ravel()])


def polar_xi_grid(n_angles: int, radii: Sequence[float], include_origin: bool = True) -> np.ndarray:
    if n_angles < 1:
        raise ConfigurationError(f"n_angles must be positive, got {n_angles}")
    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    radii = np.sort(np.asarray([r for r in radii if r > 0.0], dtype=float))
    ring = [r * np.column_stack([np.cos(angles), np.sin(angles)]) for r in radii]
    blocks = ([np.zeros((1, 2))] if include_origin else []) + ring
    return np.vstack(blocks) if blocks else np.zeros((0, 2))


def ray_xi_grid(direction, magnitudes: Sequence[float]) -> np.ndarray:
    return np.outer(np.asarray(magnitudes, dtype=float), unit_vector(direction))


def _hull_boundary_mask(points: np.ndarray) -> np.ndarray:
    try:
        hull = ConvexHull(points)
    except (QhullError, ValueError) as e:
        raise ConfigurationError(f"table nodes do not span a 2D region: {e}") from e
    scale = 1.0 + float(np.max(np.abs(points)))
    distances = points @ hull.equations[:, :2].T + hull.equations[:, 2]
    return np.max(distances, axis=1) > -1e-9 * scale


class _LocalQuadratic:
    """Least-squares quadratic model of a sampled function around each node (cached per node)."""

    def __init__(self, points: np.ndarray, values: np.ndarray, neighbours: int):
        self.points = points
        self.values = values
        self.neighbours = min(neighbours, len(points))
        self.tree = cKDTree(points)
        self._cache: Dict[int, Optional[Tuple[float, np.ndarray, np.ndarray, float]]] = {}

    def fit(self, node: int) -> Optional[Tuple[float, np.ndarray, np.ndarray, float]]:
        if node not in self._cache:
            self._cache[node] = self._fit(node)
        return self._cache[node]

    def _fit(self, node: int):
        if self.neighbours < 6:
            return None
        _, index = self.tree.query(self.points[node], k=self.neighbours)
        offsets = self.points[index] - self.points[node]
        radius = float(np.max(np.linalg.norm(offsets, axis=1)))
        if radius == 0.0:
            return None
        u = offsets / radius
        design = np.column_stack([np.ones(len(u)), u[:, 0], u[:, 1], u[:, 0] ** 2, u[:, 0] * u[:, 1], u[:, 1] ** 2])
        coefficients, _, rank, _ = np.linalg.lstsq(design, self.values[index], rcond=None)
        if rank < 6:
            return None
        c, bx, by, axx, axy, ayy = coefficients
        gradient = np.array([bx, by]) / radius
        hessian = np.array([[2.0 * axx, axy], [axy, 2.0 * ayy]]) / radius ** 2
        if np.min(np.linalg.eigvalsh(hessian)) <= 0.0:
            return None
        return float(c), gradient, hessian, radius


def _discrete_conjugate(points: np.ndarray, values: np.ndarray, queries: np.ndarray,
                        neighbours: int = DEFAULT_NEIGHBOURS) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """sup over sampled x of x·y − h(x) for every query y; returns (values, maximisers, flags)."""
    on_boundary = _hull_boundary_mask(points)
    model = _LocalQuadratic(points, values, neighbours)
    n = len(queries)
    conjugate = np.empty(n)
    maximisers = np.empty((n, 2))
    flags: List[str] = []

    for start in range(0, n, QUERY_CHUNK):
        block = queries[start:start + QUERY_CHUNK]
        scores = block @ points.T - values[None, :]
        best_nodes = np.argmax(scores, axis=1)
        for offset, node in enumerate(best_nodes):
            i = start + offset
            y = block[offset]
            best = float(scores[offset, node])
            conjugate[i], maximisers[i] = best, points[node]
            if on_boundary[node]:
                flags.append(FLAG_BOUNDARY)
                continue
            fitted = model.fit(int(node))
            if fitted is None:
                flags.append(FLAG_UNREFINED)
                continue
            c, gradient, hessian, radius = fitted
            step = np.linalg.solve(hessian, y - gradient)
            if np.linalg.norm(step) > radius:
                flags.append(FLAG_UNREFINED)
                continue
            refined = float(y @ (points[node] + step) - (c + gradient @ step + 0.5 * step @ hessian @ step))
            if refined > best:
                conjugate[i], maximisers[i] = refined, points[node] + step
            flags.append(FLAG_OK)
    return conjugate, maximisers, flags


def legendre_transform(ftable: FTable, xi_grid, neighbours: int = DEFAULT_NEIGHBOURS) -> RateTable:
    """g(ξ) = sup_p (p·ξ − f(p)) over the table's converged nodes."""
    points, values = ftable.points(), ftable.values()
    if len(points) < 3:
        raise ConfigurationError(f"Legendre transform needs at least 3 tabulated nodes, got {len(points)}")
    queries = as_points(xi_grid)
    g, maximisers, flags = _discrete_conjugate(points, values, queries, neighbours)
    frame = pd.DataFrame({
        'xi_x': queries[:, 0], 'xi_y': queries[:, 1], 'g': g,
        'p_max_x': maximisers[:, 0], 'p_max_y': maximisers[:, 1], 'flag': flags,
    })
    n_boundary = flags.count(FLAG_BOUNDARY)
    if n_boundary:
        get_logger().warning(f"⚠️ {n_boundary}/{len(queries)} ξ nodes attain their maximum on the p-grid boundary")
    metadata = {
        'source': dict(ftable.metadata),
        'p_max': ftable.p_max(),
        'n_p_nodes': len(points),
        'neighbours': neighbours,
        'n_boundary': n_boundary,
    }
    return RateTable(frame, metadata)


def inverse_legendre(rate_table: RateTable, p_grid, neighbours: int = DEFAULT_NEIGHBOURS) -> FTable:
    """f(p) = sup_ξ (p·ξ − g(ξ)) over the rate table's non-boundary nodes; hull maxima get status 'boundary'."""
    interior = rate_table.interior_frame
    points = interior[['xi_x', 'xi_y']].to_numpy(dtype=float)
    values = interior['g'].to_numpy(dtype=float)
    if len(points) < 3:
        raise ConfigurationError("inverse transform needs at least 3 interior rate-table nodes")
    queries = as_points(p_grid)
    f, _, flags = _discrete_conjugate(points, values, queries, neighbours)
    frame = pd.DataFrame({
        'p': queries[:, 0], 'q': queries[:, 1], 'f': f,
        'status': ['boundary' if flag == FLAG_BOUNDARY else 'ok' for flag in flags],
    })
    return FTable(frame, {'inverse_of': dict(rate_table.metadata)})


def conjugate_function(ftable: FTable, neighbours: int = DEFAULT_NEIGHBOURS) -> Callable[[Any], np.ndarray]:
    """g as a callable transforming on demand; boundary-attained queries raise CoverageError."""
    def g(xi) -> np.ndarray:
        table = legendre_transform(ftable, xi, neighbours)
        if table.n_boundary:
            raise CoverageError(f"{table.n_boundary} ξ values need tilts beyond |p| = {ftable.p_max():.3g}")
        values = table.values()
        return float(values[0]) if is_single_vector(xi) else values
    return g


def young_fenchel_audit(ftable: FTable, rate_table: RateTable) -> float:
    """max over sampled pairs of p·ξ − f(p) − g(ξ); positive values are violations."""
    p_points, f_values = ftable.points(), ftable.values()
    xi_points, g_values = rate_table.points(), rate_table.values()
    worst = -np.inf
    for start in range(0, len(xi_points), QUERY_CHUNK):
        block = slice(start, start + QUERY_CHUNK)
        gap = xi_points[block] @ p_points.T - f_values[None, :] - g_values[block, None]
        worst = max(worst, float(np.max(gap)))
    return worst


def _line_second_differences(frame: pd.DataFrame, along: str, across: str, decimals: int) -> np.ndarray:
    keyed = frame.assign(key=frame[across].round(decimals)).sort_values(['key', along])
    differences = []
    for _, line in keyed.groupby('key'):
        if len(line) < 3:
            continue
        x = line[along].to_numpy(dtype=float)
        y = line['g'].to_numpy(dtype=float)
        slopes = np.diff(y) / np.diff(x)
        differences.append(2.0 * np.diff(slopes) / (x[2:] - x[:-2]))
    return np.concatenate(differences) if differences else np.array([])


def convexity_audit(rate_table: RateTable, decimals: int = 9) -> float:
    """Smallest second divided difference of g along the grid lines of a tensor ξ-grid (inf if none)."""
    interior = rate_table.interior_frame
    both = np.concatenate([
        _line_second_differences(interior, 'xi_x', 'xi_y', decimals),
        _line_second_differences(interior, 'xi_y', 'xi_x', decimals),
    ])
    return float(np.min(both)) if len(both) else float('inf')


def fit_kappa_contour(rate_table: RateTable, xi_max: float = 0.2) -> float:
    """κ_eff from the least-squares fit g ≈ |ξ|²/(4κ) over 0 < |ξ| ≤ xi_max."""
    interior = rate_table.interior_frame
    xi = interior[['xi_x', 'xi_y']].to_numpy(dtype=float)
    squared = np.sum(xi ** 2, axis=1)
    mask = (squared > 0.0) & (squared <= xi_max ** 2)
    if not np.any(mask):
        raise CoverageError(f"no rate-table nodes with 0 < |ξ| ≤ {xi_max}")
    g = interior['g'].to_numpy(dtype=float)[mask]
    curvature = float(np.sum(g * squared[mask]) / np.sum(squared[mask] ** 2))
    return 1.0 / (4.0 * curvature)


def hessian_kappa(table, radius: Optional[float] = None) -> float:
    """
    κ_eff from the curvature at the origin of a rate table (g ≈ |ξ|²/(4κ)) or an
    f-table (f ≈ κ|p|²), fitting a x² + b xy + c y² to the nodes with |x| ≤ radius.
    """
    if isinstance(table, RateTable):
        interior = table.interior_frame
        points = interior[['xi_x', 'xi_y']].to_numpy(dtype=float)
        values = interior['g'].to_numpy(dtype=float)
    elif isinstance(table, FTable):
        points, values = table.points(), table.values()
    else:
        raise ConfigurationError(f"unsupported table type {type(table).__name__}")
    norms = np.linalg.norm(points, axis=1)
    radius = 0.2 * float(np.max(norms)) if radius is None else radius
    mask = (norms > 0.0) & (norms <= radius)
    if np.sum(mask) < 3:
        nearest = np.sort(norms[norms > 0.0])[:3]
        if len(nearest) < 3:
            raise CoverageError(f"fewer than 3 nodes away from the origin (table has {len(nearest)})")
        raise CoverageError(f"fewer than 3 nodes with 0 < |x| ≤ {radius:.3g}; the nearest lie at |x| = "
                            f"{', '.join(f'{n:.3g}' for n in nearest)}, so use radius ≥ {nearest[-1]:.3g}")
    x, y = points[mask, 0], points[mask, 1]
    design = np.column_stack([x ** 2, x * y, y ** 2])
    (a, _, c), _, rank, _ = np.linalg.lstsq(design, values[mask], rcond=None)
    if rank < 3:
        raise CoverageError("nodes near the origin do not determine a quadratic form")
    if isinstance(table, RateTable):
        return 1.0 / (2.0 * (a + c))
    return 0.5 * (a + c)