"""
Canonical cusp problem on the trimmed astroid and the tabulated functionals D_i(f₀).

    ∇²ψ* = f₀ ψ*  in the astroid,  ∂ψ*/∂n = 0 on the arcs,

with unit singular inflow at the west cusp imposed as a uniform Neumann datum of
total flux −1/π on the west trimming segment. The cusps are numbered
1 west (source), 2 south, 3 east, 4 north.

ψ* < 0 throughout, so D₂, D₃, D₄ > 0. D₁ is the offset left after removing −1/x at
the source and is not signed: in the cusp channel of width x²/π the local solution is
−e^{−√f₀ x}/x, so D₁ ≈ −√f₀ once f₀ is of order one or larger.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.interpolate import PchipInterpolator
from scipy.sparse.linalg import spsolve

from src.eigen.assembly import assemble_vertex_matrices
from src.geometry.cell import AstroidSpec, LATTICE_HALF_PERIOD
from src.geometry.mesher import Mesh, build_astroid_mesh
from src.utils.errors import ConfigurationError, MeshingError, ObstacleLDError, TableRangeError
from src.utils.logger import get_logger
from src.utils.tables import build_provenance, read_table, write_table

PI = LATTICE_HALF_PERIOD
CUSP_ORDER = ('cusp_trim_W', 'cusp_trim_S', 'cusp_trim_E', 'cusp_trim_N')
DTABLE_COLUMNS = ['f0', 'D1', 'D2', 'D3']


def _trim_mean(mesh: Mesh, values: np.ndarray, tag: str) -> float:
    edges = mesh.edges_with_tag(tag)
    if not len(edges):
        raise MeshingError(f"astroid mesh has no '{tag}' edges")
    lengths = np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1)
    return float(np.sum(lengths * 0.5 * (values[edges[:, 0]] + values[edges[:, 1]])) / np.sum(lengths))


@dataclass
class CanonicalResult:
    f0: float
    psi: np.ndarray = field(repr=False)
    d_values: Tuple[float, float, float, float]
    trim_distance: float

    @property
    def D1(self) -> float:
        return self.d_values[0]

    @property
    def D2(self) -> float:
        return self.d_values[1]

    @property
    def D3(self) -> float:
        return self.d_values[2]

    @property
    def D4(self) -> float:
        return self.d_values[3]

    def symmetry_mismatch(self) -> float:
        """Relative mismatch between D₂ and D₄, zero for an exactly mirror-symmetric solve."""
        return abs(self.D2 - self.D4) / max(abs(self.D2), abs(self.D4), 1e-300)


class CanonicalProblem:
    """Astroid mesh plus its assembled stiffness, mass and cusp load; solve() is reentrant."""

    def __init__(self, spec: AstroidSpec, mesh: Optional[Mesh] = None):
        self.spec = spec
        self.mesh = mesh or build_astroid_mesh(spec)
        missing = [tag for tag in CUSP_ORDER if tag not in self.mesh.boundary_tags]
        if missing:
            raise MeshingError(f"astroid mesh lacks trimming segments {missing}")
        stiffness, _, _, mass = assemble_vertex_matrices(self.mesh)
        self.stiffness = stiffness.tocsc()
        self.mass = mass.tocsc()
        self.load = self._cusp_load()

    def _cusp_load(self) -> np.ndarray:
        edges = self.mesh.edges_with_tag(CUSP_ORDER[0])
        lengths = np.linalg.norm(self.mesh.vertices[edges[:, 0]] - self.mesh.vertices[edges[:, 1]], axis=1)
        flux_density = -1.0 / (PI * float(np.sum(lengths)))
        load = np.zeros(self.mesh.n_vertices)
        np.add.at(load, edges[:, 0], 0.5 * flux_density * lengths)
        np.add.at(load, edges[:, 1], 0.5 * flux_density * lengths)
        return load

    def solve(self, f0: float) -> CanonicalResult:
        if not f0 > 0.0:
            raise ConfigurationError(f"f0 must be positive (the pure Neumann problem is singular at f0 = 0), got {f0}")
        psi = spsolve(sparse.csc_matrix(self.stiffness + f0 * self.mass), self.load)
        if not np.all(np.isfinite(psi)):
            raise ObstacleLDError(f"canonical solve produced non-finite values at f0={f0}")
        means = [_trim_mean(self.mesh, psi, tag) for tag in CUSP_ORDER]
        delta = self.spec.trim_distance
        d_values = (-means[0] - 1.0 / delta, -means[1], -means[2], -means[3])
        return CanonicalResult(float(f0), psi, d_values, delta)


def solve_canonical(f0: float, spec: AstroidSpec, problem: Optional[CanonicalProblem] = None) -> CanonicalResult:
    problem = problem or CanonicalProblem(spec)
    return problem.solve(f0)


def canonical_field(f0: float, spec: AstroidSpec, problem: Optional[CanonicalProblem] = None) -> pd.DataFrame:
    """Nodal ψ* with log10|ψ*| for plotting."""
    problem = problem or CanonicalProblem(spec)
    result = problem.solve(f0)
    psi = result.psi
    with np.errstate(divide='ignore'):
        log_abs = np.log10(np.abs(psi))
    return pd.DataFrame({
        'x': problem.mesh.vertices[:, 0],
        'y': problem.mesh.vertices[:, 1],
        'psi': psi,
        'log10_abs_psi': log_abs,
    })


def default_f0_grid(n: int = 40, low: float = 1e-3, high: float = 30.0) -> np.ndarray:
    if n < 1 or not 0.0 < low <= high:
        raise ConfigurationError(f"invalid f0 grid (n={n}, low={low}, high={high})")
    return np.geomspace(low, high, n)


@dataclass
class DTable:
    """D₁, D₂, D₃ against increasing f₀ (D₄ ≡ D₂), interpolated by PCHIP in log f₀."""

    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        frame = self.frame[DTABLE_COLUMNS].dropna().sort_values('f0').reset_index(drop=True)
        if not len(frame):
            raise ConfigurationError("D table has no nodes")
        if np.any(frame['f0'] <= 0.0) or np.any(np.diff(frame['f0']) <= 0.0):
            raise ConfigurationError("D table f0 nodes must be positive and strictly increasing")
        self.frame = frame
        self._interpolators = None

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def f_bounds(self) -> Tuple[float, float]:
        return float(self.frame['f0'].iloc[0]), float(self.frame['f0'].iloc[-1])

    def evaluate(self, f: float) -> Tuple[float, float, float]:
        low, high = self.f_bounds
        if not low <= f <= high:
            raise TableRangeError(f"f={f:.6g} outside the tabulated range [{low:.6g}, {high:.6g}]")
        if len(self.frame) == 1:
            row = self.frame.iloc[0]
            return float(row['D1']), float(row['D2']), float(row['D3'])
        if self._interpolators is None:
            log_f0 = np.log(self.frame['f0'].to_numpy(dtype=float))
            self._interpolators = [
                PchipInterpolator(log_f0, self.frame[column].to_numpy(dtype=float)) for column in ('D1', 'D2', 'D3')
            ]
        log_f = np.log(f)
        return tuple(float(interpolator(log_f)) for interpolator in self._interpolators)

    def monotonicity_violations(self, tolerance: float = 1e-12) -> Dict[str, int]:
        """Count of neighbouring nodes where D_i fails to decrease."""
        return {column: int(np.sum(np.diff(self.frame[column]) > tolerance)) for column in ('D1', 'D2', 'D3')}

    def nonpositive_nodes(self) -> Dict[str, List[float]]:
        """f₀ nodes where D₂ or D₃ fails to be positive; D₁ has no sign and is not checked."""
        return {column: [float(f0) for f0 in self.frame.loc[self.frame[column] <= 0.0, 'f0']]
                for column in ('D2', 'D3')}

    def d1_zero_crossing(self) -> Optional[float]:
        """f₀ where D₁ first turns non-positive, linear in log f₀ between nodes; None if it never does."""
        d1 = self.frame['D1'].to_numpy(dtype=float)
        f0 = self.frame['f0'].to_numpy(dtype=float)
        below = np.flatnonzero(d1 <= 0.0)
        if not len(below):
            return None
        k = int(below[0])
        if k == 0:
            return float(f0[0])
        weight = d1[k - 1] / (d1[k - 1] - d1[k])
        return float(np.exp(np.log(f0[k - 1]) + weight * (np.log(f0[k]) - np.log(f0[k - 1]))))

    def to_csv(self, path: str, config: Optional[Dict[str, Any]] = None) -> str:
        return write_table(self.frame, path, build_provenance('dtable', self.metadata, config))

    @classmethod
    def read_csv(cls, path: str) -> 'DTable':
        frame, provenance = read_table(path)
        return cls(frame, provenance.get('metadata', {}))


def tabulate_D(f0_grid: Sequence[float], spec: AstroidSpec, max_workers: int = 1, show_progress: bool = False,
               problem: Optional[CanonicalProblem] = None) -> DTable:
    """Canonical solves over the f₀ grid; failed nodes are logged and left out of the table."""
    logger = get_logger()
    problem = problem or CanonicalProblem(spec)
    grid = sorted(float(f0) for f0 in f0_grid)
    if not grid or grid[0] <= 0.0:
        raise ConfigurationError("f0 grid must be non-empty and positive")
    logger.info(f"🧮 Tabulating D_i at {len(grid)} f0 values (δ={spec.trim_distance}, "
                f"{problem.mesh.n_vertices} vertices)")

    results: Dict[int, CanonicalResult] = {}
    failures: List[Dict[str, Any]] = []

    def run(index: int):
        return index, problem.solve(grid[index])

    with logger.progress(len(grid), "🧮 Canonical solves", "f0", enabled=show_progress) as progress:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
            futures = {executor.submit(run, i): i for i in range(len(grid))}
            for future in as_completed(futures):
                index = futures[future]
                try:
                    _, result = future.result()
                    results[index] = result
                except (ObstacleLDError, ArithmeticError, RuntimeError) as e:
                    logger.warning(f"⚠️ Canonical solve failed at f0={grid[index]:.4g}: {e}")
                    failures.append({'f0': grid[index], 'error': str(e)})
                progress.update(1)

    ordered = [results[i] for i in sorted(results)]
    frame = pd.DataFrame({
        'f0': [r.f0 for r in ordered],
        'D1': [r.D1 for r in ordered],
        'D2': [r.D2 for r in ordered],
        'D3': [r.D3 for r in ordered],
    })
    mismatch = max((r.symmetry_mismatch() for r in ordered), default=0.0)
    metadata = {
        'trim_distance': spec.trim_distance,
        'mesh_size': problem.mesh.mesh_size,
        'n_vertices': problem.mesh.n_vertices,
        'max_d4_d2_mismatch': mismatch,
        'failed_nodes': sorted(failures, key=lambda item: item['f0']),
    }
    table = DTable(frame, metadata)
    violations = table.monotonicity_violations()
    table.metadata['monotonicity_violations'] = violations
    if any(violations.values()):
        logger.warning(f"⚠️ D_i not decreasing in f0 at {violations}")
    nonpositive = table.nonpositive_nodes()
    table.metadata['nonpositive_nodes'] = nonpositive
    if any(nonpositive.values()):
        logger.warning(f"⚠️ Non-positive D values at f0 {nonpositive} (screened beyond the mesh resolution?)")
    crossing = table.d1_zero_crossing()
    table.metadata['d1_zero_crossing'] = crossing
    if crossing is not None:
        logger.info(f"ℹ️ D1 changes sign near f0={crossing:.4g} (D1 ≈ -√f0 at large f0)")
    logger.info(f"✅ D table complete ({len(table)} nodes, {len(failures)} failures, D4/D2 mismatch {mismatch:.2e})")
    return table
