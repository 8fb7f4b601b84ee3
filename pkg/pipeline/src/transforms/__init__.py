"""
Transforms package: numerical Legendre transform and closed-form rate functions.
"""

from .closed_forms import (
    dilute_f,
    dilute_g,
    gap_coefficient,
    keller_kappa,
    keller_kappa_eps,
    maxwell_kappa,
    quadratic_f,
    quadratic_g,
)
from .legendre import (
    RATE_COLUMNS,
    RateTable,
    conjugate_function,
    convexity_audit,
    fit_kappa_contour,
    hessian_kappa,
    inverse_legendre,
    legendre_transform,
    polar_xi_grid,
    ray_xi_grid,
    square_xi_grid,
    unit_vector,
    young_fenchel_audit,
)

__all__ = [
    'dilute_f', 'dilute_g', 'gap_coefficient', 'keller_kappa', 'keller_kappa_eps', 'maxwell_kappa',
    'quadratic_f', 'quadratic_g', 'RATE_COLUMNS', 'RateTable', 'conjugate_function', 'convexity_audit',
    'fit_kappa_contour', 'hessian_kappa', 'inverse_legendre', 'legendre_transform', 'polar_xi_grid',
    'ray_xi_grid', 'square_xi_grid', 'unit_vector', 'young_fenchel_audit',
]
