"""
Dispersion package: concentration profiles, FKPP front speeds and model comparisons.
"""

from .profiles import (
    PROFILE_COLUMNS,
    ConcentrationProfile,
    concentration_profile,
    evaluate_rate,
    gaussian_profile,
    times_from_tau,
)
from .fronts import FrontSpeed, fkpp_front_speed, front_speed_from_rate
from .compare import ModelComparison, compare_models

__all__ = [
    'PROFILE_COLUMNS', 'ConcentrationProfile', 'concentration_profile', 'evaluate_rate', 'gaussian_profile',
    'times_from_tau', 'FrontSpeed', 'fkpp_front_speed', 'front_speed_from_rate', 'ModelComparison',
    'compare_models',
]
