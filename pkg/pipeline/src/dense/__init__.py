"""
Dense-limit asymptotics: network model, canonical cusp problem, transcendental relation, geodesic tail.
"""

from .network import NetworkParams, network_f, network_g, network_kappa
from .canonical import (
    CanonicalProblem,
    CanonicalResult,
    DTable,
    canonical_field,
    default_f0_grid,
    solve_canonical,
    tabulate_D,
)
from .transcendental import (
    DenseFResult,
    SmallFLaw,
    dispersion_determinant,
    on_axis_cosh,
    small_f_dtable_law,
    transcendental_ftable,
    transcendental_residual,
    transcendental_solve,
)
from .geodesic import geodesic_distance, geodesic_rate

__all__ = [
    'NetworkParams', 'network_f', 'network_g', 'network_kappa', 'CanonicalProblem', 'CanonicalResult',
    'DTable', 'canonical_field', 'default_f0_grid', 'solve_canonical', 'tabulate_D', 'DenseFResult',
    'SmallFLaw', 'dispersion_determinant', 'on_axis_cosh', 'small_f_dtable_law', 'transcendental_ftable',
    'transcendental_residual', 'transcendental_solve', 'geodesic_distance', 'geodesic_rate',
]
