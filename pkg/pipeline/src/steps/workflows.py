"""
Compute chains shared by the subcommands: mesh → f-table → rate table, and
D table → dense-asymptotic f-table → rate table.
"""

import math
from typing import Any, Dict, Optional

import numpy as np

from src.dense.canonical import CanonicalProblem, DTable, tabulate_D
from src.dense.network import network_g
from src.dense.transcendental import transcendental_ftable
from src.eigen.ftable import FTable, complete_symmetry
from src.eigen.sweep import radial_monotonicity_violations, sweep_f, symmetry_defect
from src.geometry.mesher import Mesh, build_cell_mesh
from src.steps.run_config import RunConfig
from src.transforms.closed_forms import keller_kappa_eps, maxwell_kappa
from src.transforms.legendre import (
    RateTable, convexity_audit, fit_kappa_contour, hessian_kappa, legendre_transform, young_fenchel_audit,
)
from src.utils.errors import ConfigurationError, CoverageError
from src.utils.logger import get_logger


def cell_mesh(run_config: RunConfig) -> Mesh:
    spec = run_config.cell_spec()
    get_logger().info(f"🔺 Meshing cell a={spec.obstacle_radius:.6g} (ε={spec.epsilon:.3g}, h={run_config.mesh_size})")
    return build_cell_mesh(spec, run_config.mesh_size, refinement_ratio=run_config.refinement_ratio,
                           grade=run_config.grade, min_angle=run_config.min_angle,
                           epsilon_floor=run_config.epsilon_floor)


def fem_ftable(run_config: RunConfig, mesh: Mesh) -> FTable:
    """Eigenvalue sweep over the configured tilt grid, completed by symmetry when it covers a sector."""
    ftable = sweep_f(mesh, run_config.tilt_grid(), continuation=run_config.continuation,
                     options=run_config.solver_options(), max_workers=run_config.workers,
                     continue_on_error=run_config.continue_on_error, show_progress=run_config.show_progress)
    if run_config.sector_only:
        ftable = complete_symmetry(ftable)
    return ftable


def audit_ftable(ftable: FTable, run_config: RunConfig) -> Dict[str, Any]:
    violations = ftable.bound_violations(slack=run_config.bound_slack())
    audit = {
        'nodes': len(ftable),
        'failed_nodes': max(ftable.n_failed, int(ftable.metadata.get('n_failed', 0))),
        'bound_violations': len(violations),
        'bound_slack': run_config.bound_slack(),
        'radial_monotonicity_violations': radial_monotonicity_violations(ftable),
        'symmetry_defect': symmetry_defect(ftable),
    }
    if audit['bound_violations']:
        first = violations.iloc[0]
        get_logger().warning(f"⚠️ {audit['bound_violations']} nodes violate 0 ≤ f ≤ |p|²(1 + {audit['bound_slack']:.3g}), "
                             f"first at p=({first['p']:.3g}, {first['q']:.3g}) with f={first['f']:.4g}")
    return audit


def rate_from_ftable(run_config: RunConfig, ftable: FTable, xi: Optional[np.ndarray] = None) -> RateTable:
    rate = legendre_transform(ftable, run_config.xi_points() if xi is None else xi, run_config.neighbours)
    if rate.n_boundary:
        get_logger().warning(f"⚠️ {rate.n_boundary}/{len(rate)} ξ nodes reach the p-grid boundary "
                             f"(|p|max={ftable.p_max():.3g}); widen the p-grid or shrink the ξ-grid")
    return rate


def _optional(compute) -> Optional[float]:
    try:
        return float(compute())
    except (ConfigurationError, CoverageError) as e:
        get_logger().debug(f"Audit skipped: {e}")
        return None


def audit_rate(run_config: RunConfig, ftable: FTable, rate: RateTable) -> Dict[str, Any]:
    """Young–Fenchel, convexity and κ_eff estimates, with closed-form references where defined."""
    audit: Dict[str, Any] = {
        'xi_nodes': len(rate),
        'boundary_nodes': rate.n_boundary,
        'young_fenchel_violation': young_fenchel_audit(ftable, rate),
        'kappa_contour': _optional(lambda: fit_kappa_contour(rate, run_config.kappa_fit_radius)),
        'kappa_hessian': _optional(lambda: hessian_kappa(ftable)),
    }
    if run_config.xi_grid == 'square':
        audit['min_second_difference'] = convexity_audit(rate)
    if run_config.has_geometry:
        spec = run_config.cell_spec()
        audit['kappa_maxwell'] = _optional(lambda: maxwell_kappa(spec.sigma))
        audit['kappa_keller'] = _optional(lambda: keller_kappa_eps(spec.epsilon))
    return audit


def canonical_dtable(run_config: RunConfig, problem: Optional[CanonicalProblem] = None) -> DTable:
    spec = run_config.astroid_spec()
    return tabulate_D(run_config.f0_grid(), spec, max_workers=run_config.workers,
                      show_progress=run_config.show_progress, problem=problem)


def dense_ftable(run_config: RunConfig, dtable) -> FTable:
    """Dense-asymptotic f on the configured polar grid (the square layout has no ray structure)."""
    ftable = transcendental_ftable(dtable, run_config.network_params(), run_config.polar_angles(),
                                   run_config.polar_radii(), max_workers=run_config.workers,
                                   continue_on_error=run_config.continue_on_error)
    if run_config.sector_only:
        ftable = complete_symmetry(ftable)
    return ftable


def network_comparison(run_config: RunConfig, rate: RateTable) -> Optional[float]:
    """Largest relative gap between a rate table and the network rate over interior nodes away from ξ = 0."""
    interior = rate.interior_frame
    xi = interior[['xi_x', 'xi_y']].to_numpy(dtype=float)
    mask = np.hypot(xi[:, 0], xi[:, 1]) > 0.0
    if not np.any(mask):
        return None
    reference = np.asarray(network_g(xi[mask], run_config.network_params()), dtype=float)
    values = interior['g'].to_numpy(dtype=float)[mask]
    relative = np.abs(values - reference) / reference
    worst = float(np.max(relative))
    return worst if math.isfinite(worst) else None
