"""
Run configuration: the flat, serialisable parameter set behind every subcommand.

Built from the merged step configuration (global defaults < step file < --set overrides).
Each field reads one dotted key of that configuration, listed in FIELD_SOURCES.
"""

import copy
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

import numpy as np

from src.dense.canonical import default_f0_grid
from src.dense.network import NetworkParams
from src.eigen.grids import graded_radii, polar_p_grid, sector_angles, square_p_grid
from src.eigen.solver import SolverOptions
from src.eigen.tilt import TiltVector
from src.geometry.cell import AstroidSpec, CellSpec, CellVariant
from src.transforms.legendre import polar_xi_grid, square_xi_grid
from src.utils.config_loader import ConfigLoader
from src.utils.errors import ConfigurationError
from src.utils.tables import config_hash

FIELD_SOURCES = {
    'obstacle_radius': 'geometry.obstacle_radius',
    'epsilon': 'geometry.epsilon',
    'cell_variant': 'geometry.cell_variant',
    'mesh_size': 'geometry.mesh_size',
    'refinement_ratio': 'geometry.refinement_ratio',
    'grade': 'geometry.grade',
    'min_angle': 'geometry.min_angle',
    'epsilon_floor': 'geometry.epsilon_floor',
    'p_grid': 'transforms.p_grid',
    'n_angles': 'transforms.n_angles',
    'n_radial': 'transforms.n_radial',
    'p_max': 'transforms.p_max',
    'p_grading': 'transforms.p_grading',
    'p_sector': 'transforms.p_sector',
    'square_n': 'transforms.square_n',
    'continuation': 'transforms.continuation',
    'xi_grid': 'transforms.xi_grid',
    'xi_n': 'transforms.xi_n',
    'xi_angles': 'transforms.xi_angles',
    'xi_max': 'transforms.xi_max',
    'xi_quadrant': 'transforms.xi_quadrant',
    'neighbours': 'transforms.neighbours',
    'kappa_fit_radius': 'transforms.kappa_fit_radius',
    'trim_distance': 'dense.trim_distance',
    'astroid_mesh_size': 'dense.mesh_size',
    'astroid_refinement_ratio': 'dense.refinement_ratio',
    'f0_min': 'dense.f0_min',
    'f0_max': 'dense.f0_max',
    'n_f0': 'dense.n_f0',
    'solver': 'solver',
    'parallel_processing': 'performance.parallel_processing',
    'max_workers': 'performance.max_workers',
    'show_progress': 'performance.show_progress',
    'continue_on_error': 'error_handling.continue_on_node_error',
    'bound_slack_factor': 'error_handling.bound_slack_factor',
}

# Fields that change where or how fast a run happens, never what it computes
RUNTIME_FIELDS = ('output_dir', 'parallel_processing', 'max_workers', 'show_progress')

P_GRID_KINDS = ('polar', 'square')
XI_GRID_KINDS = ('square', 'polar')
SECTORS = ('full', 'quadrant', 'octant')


@dataclass
class RunConfig:
    obstacle_radius: Optional[float] = None
    epsilon: Optional[float] = None
    cell_variant: str = CellVariant.OMEGA.value
    mesh_size: float = 0.1
    refinement_ratio: float = 0.25
    grade: float = 0.3
    min_angle: float = 25.0
    epsilon_floor: float = 1e-4
    p_grid: str = 'polar'
    n_angles: int = 12
    n_radial: int = 6
    p_max: float = 3.0
    p_grading: float = 1.0
    p_sector: str = 'full'
    square_n: int = 9
    continuation: bool = True
    xi_grid: str = 'square'
    xi_n: int = 41
    xi_angles: int = 16
    xi_max: float = 2.0
    xi_quadrant: bool = False
    neighbours: int = 12
    kappa_fit_radius: float = 0.2
    trim_distance: float = 0.01
    astroid_mesh_size: float = 0.1
    astroid_refinement_ratio: float = 0.5
    f0_min: float = 1e-3
    f0_max: float = 30.0
    n_f0: int = 40
    solver: Dict[str, Any] = field(default_factory=dict)
    parallel_processing: bool = False
    max_workers: int = 1
    show_progress: bool = False
    continue_on_error: bool = True
    bound_slack_factor: float = 10.0
    output_dir: str = ''

    def __post_init__(self):
        self.validate()

    # ------------------------------------------------------------------
    # Construction and serialisation
    # ------------------------------------------------------------------

    @classmethod
    def from_config(cls, merged_config: Dict[str, Any], output_dir: str = '') -> 'RunConfig':
        """Read every FIELD_SOURCES key present in a merged step configuration."""
        values: Dict[str, Any] = {}
        for name, key_path in FIELD_SOURCES.items():
            value = ConfigLoader.lookup(merged_config, key_path)
            if value is not None:
                values[name] = copy.deepcopy(value)
        values['output_dir'] = output_dir
        return cls.from_dict(values)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown run configuration keys: {unknown}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Malformed run configuration: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(asdict(self))

    def provenance_config(self) -> Dict[str, Any]:
        """The part of the configuration that determines the numbers written to disk."""
        return {key: value for key, value in self.to_dict().items() if key not in RUNTIME_FIELDS}

    def config_hash(self) -> str:
        return config_hash(self.provenance_config())

    def with_changes(self, **changes) -> 'RunConfig':
        """Copy with some fields replaced; setting one geometry key clears the other."""
        if 'obstacle_radius' in changes and 'epsilon' not in changes:
            changes['epsilon'] = None
        if 'epsilon' in changes and 'obstacle_radius' not in changes:
            changes['obstacle_radius'] = None
        unknown = sorted(set(changes) - {f.name for f in fields(self)})
        if unknown:
            raise ConfigurationError(f"Unknown run configuration keys: {unknown}")
        return replace(self, **changes)

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> None:
        problems: List[str] = []

        def require(condition: bool, message: str) -> None:
            if not condition:
                problems.append(message)

        require(self.obstacle_radius is None or self.epsilon is None,
                "set either geometry.obstacle_radius or geometry.epsilon, not both")
        require(self.cell_variant in {variant.value for variant in CellVariant},
                f"unknown cell_variant '{self.cell_variant}'")
        require(self.mesh_size > 0.0, f"mesh_size must be positive, got {self.mesh_size}")
        require(0.0 < self.refinement_ratio <= 1.0, f"refinement_ratio must lie in (0, 1], got {self.refinement_ratio}")
        require(self.min_angle > 0.0, f"min_angle must be positive, got {self.min_angle}")
        require(self.p_grid in P_GRID_KINDS, f"p_grid must be one of {P_GRID_KINDS}, got '{self.p_grid}'")
        require(self.p_sector in SECTORS, f"p_sector must be one of {SECTORS}, got '{self.p_sector}'")
        require(self.n_angles >= 1 and self.n_radial >= 1, "n_angles and n_radial must be at least 1")
        require(self.square_n >= 1, f"square_n must be at least 1, got {self.square_n}")
        require(self.p_max >= 0.0, f"p_max must be non-negative, got {self.p_max}")
        require(self.p_grid == 'square' or self.p_max > 0.0, "a polar p-grid needs p_max > 0")
        require(self.p_grading > 0.0, f"p_grading must be positive, got {self.p_grading}")
        require(self.xi_grid in XI_GRID_KINDS, f"xi_grid must be one of {XI_GRID_KINDS}, got '{self.xi_grid}'")
        require(self.xi_n >= 1 and self.xi_angles >= 1, "xi_n and xi_angles must be at least 1")
        require(self.xi_max >= 0.0, f"xi_max must be non-negative, got {self.xi_max}")
        require(self.neighbours >= 6, f"neighbours must be at least 6 for a quadratic fit, got {self.neighbours}")
        require(self.kappa_fit_radius > 0.0, f"kappa_fit_radius must be positive, got {self.kappa_fit_radius}")
        require(0.0 < self.f0_min <= self.f0_max, "f0 range must satisfy 0 < f0_min <= f0_max")
        require(self.n_f0 >= 1, f"n_f0 must be at least 1, got {self.n_f0}")
        require(self.max_workers >= 1, f"max_workers must be at least 1, got {self.max_workers}")
        require(self.bound_slack_factor >= 0.0, "bound_slack_factor must be non-negative")
        require(isinstance(self.solver, dict), "solver must be a mapping of solver options")
        if problems:
            raise ConfigurationError("Invalid run configuration: " + "; ".join(problems))

        # Range checks owned by the geometry types
        if self.has_geometry:
            self.cell_spec()
        self.astroid_spec()

    # ------------------------------------------------------------------
    # Derived objects
    # ------------------------------------------------------------------

    @property
    def has_geometry(self) -> bool:
        return self.obstacle_radius is not None or self.epsilon is not None

    @property
    def workers(self) -> int:
        return self.max_workers if self.parallel_processing else 1

    @property
    def sector_only(self) -> bool:
        """True when the p-grid covers a symmetry sector and needs completing before transforms."""
        return self.p_sector != 'full'

    def cell_spec(self) -> CellSpec:
        if self.epsilon is not None:
            return CellSpec.from_epsilon(float(self.epsilon), CellVariant(self.cell_variant))
        if self.obstacle_radius is not None:
            return CellSpec(float(self.obstacle_radius), CellVariant(self.cell_variant))
        raise ConfigurationError("no obstacle geometry: set geometry.obstacle_radius or geometry.epsilon")

    def network_params(self) -> NetworkParams:
        return NetworkParams(self.cell_spec().epsilon)

    def astroid_spec(self) -> AstroidSpec:
        return AstroidSpec(self.trim_distance, self.astroid_mesh_size, self.astroid_refinement_ratio)

    def solver_options(self) -> SolverOptions:
        return SolverOptions.from_config(self.solver)

    def tilt_grid(self) -> List[TiltVector]:
        if self.p_grid == 'square':
            return square_p_grid(self.square_n, self.p_max, quadrant=self.sector_only)
        return polar_p_grid(self.n_angles, n_radial=self.n_radial, p_max=self.p_max,
                            grading=self.p_grading, sector=self.p_sector)

    def polar_angles(self) -> np.ndarray:
        return sector_angles(self.n_angles, self.p_sector)

    def polar_radii(self) -> np.ndarray:
        return graded_radii(self.n_radial, self.p_max, self.p_grading)

    def xi_points(self) -> np.ndarray:
        if self.xi_grid == 'polar':
            radii = np.linspace(0.0, self.xi_max, self.xi_n + 1)[1:]
            return polar_xi_grid(self.xi_angles, radii)
        return square_xi_grid(self.xi_n, self.xi_max, quadrant=self.xi_quadrant)

    def f0_grid(self) -> np.ndarray:
        return default_f0_grid(self.n_f0, self.f0_min, self.f0_max)

    def bound_slack(self) -> float:
        """Discretisation allowance in the audit f(p) ≤ |p|²(1 + slack)."""
        return self.bound_slack_factor * self.mesh_size ** 2
