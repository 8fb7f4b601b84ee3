"""
Eigenvalue sweeps over p-grids.

With continuation the grid is split into rays (common angle, increasing |p|);
rays run in parallel and every node on a ray is warm-started from its
predecessor's eigenvectors and eigenvalue.
"""

import math
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.eigen.assembly import AssembledSystem, assemble_operators
from src.eigen.ftable import FTable
from src.eigen.solver import EigenResult, SolverOptions, principal_eigenvalue
from src.eigen.tilt import TiltVector
from src.geometry.mesher import Mesh
from src.utils.errors import ObstacleLDError
from src.utils.logger import get_logger

NodeOutcome = Tuple[int, Union[EigenResult, Exception]]


def group_into_rays(p_grid: Sequence[TiltVector], decimals: int = 9) -> List[List[int]]:
    """Node indices grouped by polar angle, each ray sorted by |p|; the origin is its own ray."""
    rays: "OrderedDict[Any, List[int]]" = OrderedDict()
    for index, tilt in enumerate(p_grid):
        key = 'origin' if tilt.norm == 0.0 else round(tilt.angle, decimals)
        rays.setdefault(key, []).append(index)
    return [sorted(indices, key=lambda i: p_grid[i].norm) for indices in rays.values()]


def _warm_shift(tilt: TiltVector, history: List[EigenResult], offset: float) -> Optional[float]:
    """Shift extrapolated from the previous nodes on the ray, capped at |p|² + offset."""
    if not history:
        return None
    last = history[-1]
    r, r_last = tilt.norm, last.tilt.norm
    if r_last == 0.0:
        return None
    guess = last.f * (r / r_last) ** 2
    if len(history) > 1 and history[-2].tilt.norm < r_last:
        before = history[-2]
        slope = (last.f - before.f) / (r_last - before.tilt.norm)
        guess = max(guess, last.f + slope * (r - r_last))
    return min(tilt.norm_sq, guess) + offset


def _solve_ray(system: AssembledSystem, p_grid: Sequence[TiltVector], indices: Sequence[int],
               options: SolverOptions, continuation: bool, continue_on_error: bool) -> List[NodeOutcome]:
    outcomes: List[NodeOutcome] = []
    history: List[EigenResult] = []
    for index in indices:
        tilt = p_grid[index]
        try:
            if continuation and history:
                previous = history[-1]
                result = principal_eigenvalue(
                    system, tilt, shift_guess=_warm_shift(tilt, history, options.shift_offset),
                    options=options, start=previous.eigenvector, left_start=previous.left_eigenvector,
                )
            else:
                result = principal_eigenvalue(system, tilt, options=options)
            history.append(result)
            outcomes.append((index, result))
        except (ObstacleLDError, ArithmeticError, RuntimeError) as e:
            if not continue_on_error:
                raise
            get_logger().warning(f"⚠️ Eigen solve failed at p=({tilt.p:.4g}, {tilt.q:.4g}): {e}")
            outcomes.append((index, e))
    return outcomes


def _node_row(tilt: TiltVector, outcome: Union[EigenResult, Exception]) -> Dict[str, Any]:
    if isinstance(outcome, EigenResult):
        return {'p': tilt.p, 'q': tilt.q, 'f': outcome.f, 'residual': outcome.residual,
                'iterations': outcome.iterations, 'status': 'ok', 'error': ''}
    residual = getattr(outcome, 'residual', float('nan'))
    iterations = getattr(outcome, 'iterations', 0)
    return {'p': tilt.p, 'q': tilt.q, 'f': float('nan'), 'residual': residual,
            'iterations': iterations, 'status': 'failed', 'error': str(outcome)}


def sweep_f(mesh: Mesh, p_grid: Sequence[TiltVector], continuation: bool = True,
            options: Optional[SolverOptions] = None, max_workers: int = 1,
            continue_on_error: bool = True, show_progress: bool = False,
            system: Optional[AssembledSystem] = None) -> FTable:
    """
    Principal eigenvalue at every grid node; node failures are recorded, not raised,
    unless continue_on_error is off. Rows follow the order of p_grid.
    """
    logger = get_logger()
    options = options or SolverOptions()
    system = system or assemble_operators(mesh)
    p_grid = list(p_grid)
    groups = group_into_rays(p_grid) if continuation else [[i] for i in range(len(p_grid))]
    logger.info(f"📈 Sweeping f over {len(p_grid)} tilt nodes in {len(groups)} groups "
                f"({system.n_dofs} dofs, workers={max_workers})")

    outcomes: Dict[int, Union[EigenResult, Exception]] = {}
    with logger.progress(len(groups), "📈 Eigen sweep", "ray", enabled=show_progress) as progress:
        if max_workers > 1 and len(groups) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                futures = [
                    executor.submit(_solve_ray, system, p_grid, group, options, continuation, continue_on_error)
                    for group in groups
                ]
                for future in as_completed(futures):
                    outcomes.update(future.result())
                    progress.update(1)
        else:
            for group in groups:
                outcomes.update(_solve_ray(system, p_grid, group, options, continuation, continue_on_error))
                progress.update(1)

    rows = [_node_row(p_grid[i], outcomes[i]) for i in range(len(p_grid))]
    frame = pd.DataFrame(rows)
    n_failed = int(np.sum(frame['status'] != 'ok')) if len(frame) else 0
    if n_failed:
        logger.warning(f"⚠️ {n_failed}/{len(p_grid)} tilt nodes failed")
    else:
        logger.info(f"✅ Eigen sweep complete ({len(p_grid)} nodes)")

    metadata = {
        'mesh': {key: value for key, value in mesh.metadata.items() if key != 'obstacles'},
        'n_dofs': system.n_dofs,
        'tolerance': options.tolerance,
        'max_iterations': options.max_iterations,
        'shift_offset': options.shift_offset,
        'continuation': continuation,
        'n_failed': n_failed,
    }
    return FTable(frame, metadata)


def radial_monotonicity_violations(ftable: FTable, tolerance: float = 1e-10) -> int:
    """Count ray neighbours where f decreases with |p| (f convex with f(0) = 0 forbids it)."""
    tilts = ftable.tilts()
    values = ftable.values()
    violations = 0
    for ray in group_into_rays(tilts):
        along = values[ray]
        violations += int(np.sum(np.diff(along) < -tolerance * np.maximum(1.0, np.abs(along[1:]))))
    return violations


def symmetry_defect(ftable: FTable) -> float:
    """Largest relative mismatch between f(p, q), f(q, p) and f(−p, q) over nodes present in the table."""
    points = ftable.points()
    values = ftable.values()
    lookup = {(round(p, 9) + 0.0, round(q, 9) + 0.0): f for (p, q), f in zip(points, values)}
    worst = 0.0
    for (p, q), f in lookup.items():
        for image in ((q, p), (-p + 0.0, q), (p, -q + 0.0)):
            if image in lookup:
                scale = max(abs(f), abs(lookup[image]), 1e-12)
                worst = max(worst, abs(f - lookup[image]) / scale)
    return worst if math.isfinite(worst) else float('inf')
