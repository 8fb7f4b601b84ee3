"""
Eigen package: FEM assembly and principal eigenvalue of the tilted cell problem.
"""

from .tilt import TiltVector, as_points, is_single_vector
from .assembly import (
    AssembledSystem,
    PeriodicMap,
    TiltedSystem,
    assemble,
    assemble_operators,
    assemble_tilted,
    periodic_dof_map,
)
from .solver import EigenResult, SolverOptions, principal_eigenvalue, principal_eigenvalue_tilted
from .ftable import FTABLE_COLUMNS, FTable, complete_symmetry
from .grids import graded_radii, polar_p_grid, sector_angles, square_p_grid
from .sweep import group_into_rays, radial_monotonicity_violations, sweep_f, symmetry_defect
from .studies import ConvergenceStudy, convergence_study, effective_diffusivity_fem

__all__ = [
    'TiltVector', 'as_points', 'is_single_vector', 'AssembledSystem', 'PeriodicMap', 'TiltedSystem', 'assemble',
    'assemble_operators',
    'assemble_tilted', 'periodic_dof_map', 'EigenResult', 'SolverOptions', 'principal_eigenvalue',
    'principal_eigenvalue_tilted', 'FTABLE_COLUMNS', 'FTable', 'complete_symmetry', 'graded_radii',
    'polar_p_grid', 'sector_angles', 'square_p_grid', 'group_into_rays', 'radial_monotonicity_violations', 'sweep_f',
    'symmetry_defect', 'ConvergenceStudy', 'convergence_study', 'effective_diffusivity_fem',
]
