"""
Pipeline utilities package.
"""

from src.utils.logger import get_logger, initialize_logger, reset_logger, PipelineLogger
from src.utils.config_loader import ConfigLoader, load_pipeline_config, parse_override
from src.utils.env_loader import EnvLoader
from src.utils.errors import (
    ObstacleLDError, ConfigurationError, MeshingError, ConvergenceError,
    TableRangeError, CoverageError, RootBracketError
)

__all__ = [
    'get_logger',
    'initialize_logger',
    'reset_logger',
    'PipelineLogger',
    'ConfigLoader',
    'load_pipeline_config',
    'parse_override',
    'EnvLoader',
    'ObstacleLDError',
    'ConfigurationError',
    'MeshingError',
    'ConvergenceError',
    'TableRangeError',
    'CoverageError',
    'RootBracketError'
]
