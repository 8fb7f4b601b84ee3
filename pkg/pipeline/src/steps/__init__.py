"""
Pipeline steps package: one step class per subcommand.
"""

from .run_config import FIELD_SOURCES, RunConfig
from .base import ERROR_CONFIGURATION, ERROR_NUMERICAL, PipelineStep
from .mesh_report import MeshReportStep
from .f_sweep import FSweepStep
from .rate_function import RateFunctionStep
from .canonical_tabulate import CanonicalTabulateStep
from .dense_solve import DenseSolveStep
from .front_speed import FrontSpeedStep
from .compare import CompareStep
from .reproduce import ReproduceStep

STEP_CLASSES = {
    'mesh_report': MeshReportStep,
    'f_sweep': FSweepStep,
    'rate_function': RateFunctionStep,
    'canonical_tabulate': CanonicalTabulateStep,
    'dense_solve': DenseSolveStep,
    'front_speed': FrontSpeedStep,
    'compare': CompareStep,
    'reproduce': ReproduceStep,
}

__all__ = [
    'FIELD_SOURCES', 'RunConfig', 'ERROR_CONFIGURATION', 'ERROR_NUMERICAL', 'PipelineStep', 'MeshReportStep',
    'FSweepStep', 'RateFunctionStep', 'CanonicalTabulateStep', 'DenseSolveStep', 'FrontSpeedStep', 'CompareStep',
    'ReproduceStep', 'STEP_CLASSES',
]
