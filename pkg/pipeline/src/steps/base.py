"""
Common plumbing for pipeline steps: configuration loading, run-scoped paths and
the result dictionary returned to the runner.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.geometry.mesh_io import read_mesh, write_mesh
from src.geometry.mesher import Mesh
from src.steps.run_config import RunConfig
from src.utils.config_loader import ConfigLoader
from src.utils.errors import ConfigurationError, ObstacleLDError
from src.utils.logger import get_logger

ERROR_CONFIGURATION = 'configuration'
ERROR_NUMERICAL = 'numerical'


class PipelineStep:
    """Base class; subclasses set step_name and implement run()."""

    step_name = ''
    required_fields: Sequence[str] = ()

    def __init__(self, config_loader: ConfigLoader, options: Optional[Dict[str, Any]] = None):
        self.config_loader = config_loader
        self.logger = get_logger()
        self.options = dict(options or {})
        self.step_config = self._load_step_config()
        self.data_paths = config_loader.get_data_paths()

        # Ensure data directories exist
        self._ensure_directories()

        self.run_config = RunConfig.from_config(self.step_config, output_dir=self.data_paths['tables'])

    def _load_step_config(self) -> Dict[str, Any]:
        """Load and validate the step configuration."""
        try:
            config = self.config_loader.get_step_config(self.step_name)
            self.config_loader.validate_step_config(config, self.required_fields)
            return config
        except Exception as e:
            self.logger.error(f"Failed to load {self.step_name} configuration: {e}")
            raise

    def _ensure_directories(self) -> None:
        for path in self.data_paths.values():
            Path(path).mkdir(parents=True, exist_ok=True)
            self.logger.debug(f"Ensured directory exists: {path}")

    def setting(self, key_path: str, default: Any = None) -> Any:
        return ConfigLoader.lookup(self.step_config, key_path, default)

    def table_path(self, name: str) -> str:
        return str(Path(self.data_paths['tables']) / name)

    def mesh_path(self, name: str) -> str:
        return str(Path(self.data_paths['meshes']) / name)

    def input_path(self, option: str = 'input', required: bool = False) -> Optional[str]:
        path = self.options.get(option)
        if path is None:
            if required:
                raise ConfigurationError(f"{self.step_name} needs --{option.replace('_', '-')}")
            return None
        if not Path(path).exists():
            raise ConfigurationError(f"Input file not found: {path}")
        return str(path)

    def provenance_config(self) -> Dict[str, Any]:
        return self.run_config.provenance_config()

    def load_or_build_mesh(self, build, default_name: str) -> Mesh:
        """Mesh from --mesh-in when given, else build() saved under --mesh-out or the run's mesh directory."""
        mesh_in = self.input_path('mesh_in')
        if mesh_in:
            self.logger.info(f"📂 Reading mesh from {mesh_in}")
            return read_mesh(mesh_in)
        mesh = build()
        written = write_mesh(mesh, self.options.get('mesh_out') or self.mesh_path(default_name))
        self.logger.info(f"💾 Mesh written to {written} ({mesh.n_vertices} vertices, {mesh.n_triangles} triangles)")
        return mesh

    def run(self) -> Dict[str, Any]:
        raise NotImplementedError

    def execute(self) -> Dict[str, Any]:
        """Execute the step; failures come back as a result dictionary rather than an exception."""
        self.logger.info(f"🚀 Starting {self.step_name} step")
        try:
            result = self.run()
        except ConfigurationError as e:
            self.logger.error(f"❌ {self.step_name} configuration error: {e}")
            return self._failure(e, ERROR_CONFIGURATION)
        except (ObstacleLDError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as e:
            self.logger.error(f"❌ {self.step_name} failed: {e}", exception=e)
            return self._failure(e, ERROR_NUMERICAL)

        result.setdefault('success', True)
        result['step_name'] = self.step_name
        result['config_hash'] = self.run_config.config_hash()
        if result['success']:
            self.logger.info(f"✅ {self.step_name} step completed")
        else:
            result.setdefault('error_kind', ERROR_NUMERICAL)
            self.logger.error(f"❌ {self.step_name} step failed: {result.get('error')}")
        return result

    def _failure(self, error: Exception, kind: str) -> Dict[str, Any]:
        return {
            'success': False,
            'step_name': self.step_name,
            'error': str(error),
            'error_kind': kind,
        }
