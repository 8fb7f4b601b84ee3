"""
Exception hierarchy shared by the compute modules and the pipeline steps.

Steps catch these and turn them into result dictionaries; the runner maps
ConfigurationError to exit code 2 and every other ObstacleLDError to 1.
"""

from typing import Any, List, Optional, Sequence


class ObstacleLDError(Exception):
    """Base class for every error raised by the pipeline."""


class ConfigurationError(ObstacleLDError, ValueError):
    """Invalid or inconsistent configuration / precondition."""


class MeshingError(ObstacleLDError):
    """Mesh could not be generated or failed its audit."""


class ConvergenceError(ObstacleLDError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, residual: float = float('nan'),
                 iterations: int = 0, last_iterate: Optional[Any] = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.last_iterate = last_iterate


class TableRangeError(ObstacleLDError, ValueError):
    """Query outside the range covered by a tabulated function."""


class CoverageError(ObstacleLDError, ValueError):
    """Requested ξ lies outside the hull covered by a rate table."""


class RootBracketError(ObstacleLDError):
    """Scalar root finding found no sign change."""

    def __init__(self, message: str, trace: Optional[Sequence[tuple]] = None):
        super().__init__(message)
        self.trace: List[tuple] = list(trace or [])
