"""
Configuration loader utility for the obstacle-lattice rate-function pipeline.
Handles loading, merging and validation of JSON configuration files.
"""

import copy
import json
import os
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Iterable, List, Optional

from src.utils.env_loader import EnvLoader
from src.utils.errors import ConfigurationError


class ConfigLoader:
    """Utility class for loading and managing pipeline configurations."""

    def __init__(self, base_config_path: str = "config/pipeline_config.json",
                 global_config_path: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None,
                 output_root: Optional[str] = None,
                 env_loader: Optional[EnvLoader] = None):
        self.base_config_path = base_config_path
        # Relative step config paths are resolved against the project directory
        self.project_dir = Path(base_config_path).resolve().parent.parent
        self.global_config_path = global_config_path or str(Path(base_config_path).parent / "global_config.json")
        self.env_loader = env_loader or EnvLoader()
        self.base_config = self._load_config(base_config_path)
        self.global_config = self._load_global_config()
        self.overrides = dict(overrides or {})
        # Establish a per-run identifier and directories
        self.run_id = self.env_loader.get_env_var('OBSTACLE_LD_RUN_ID') or datetime.now().strftime('%Y%m%d_%H%M%S')
        self.output_root = output_root or self.env_loader.get_env_var('OBSTACLE_LD_OUTPUT_ROOT') \
            or self.base_config.get('data', {}).get('base_path', 'data')
        self._data_paths = self._compute_run_scoped_paths()
        self._ensure_directories()

    def _load_config(self, config_path: str) -> Dict[str, Any]:
        """Load JSON configuration file with error handling."""
        if not os.path.exists(config_path):
            raise ConfigurationError(f"Configuration file not found: {config_path}")
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Invalid JSON in configuration file {config_path}: {e}")

    def _load_global_config(self) -> Dict[str, Any]:
        """Load global configuration file; a missing file means no shared defaults."""
        if not os.path.exists(self.global_config_path):
            return {}
        return self._load_config(self.global_config_path)

    def _merge_global_config(self, step_config: Dict[str, Any]) -> Dict[str, Any]:
        """Merge global configuration blocks underneath the step-specific configuration."""
        merged_config = self._deep_merge({}, step_config)
        for block, defaults in self.global_config.items():
            if block == 'global' or not isinstance(defaults, dict):
                continue
            merged_config[block] = self._deep_merge(defaults, merged_config.get(block, {}))
        return merged_config

    def _deep_merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """Deep merge two dictionaries, with override values taking precedence."""
        result = copy.deepcopy(base)

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = copy.deepcopy(value)

        return result

    def _apply_overrides(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Apply dotted-key overrides (e.g. 'geometry.mesh_size') coming from the command line."""
        result = copy.deepcopy(config)
        for key_path, value in self.overrides.items():
            keys = key_path.split('.')
            node = result
            for key in keys[:-1]:
                if not isinstance(node.get(key), dict):
                    node[key] = {}
                node = node[key]
            node[keys[-1]] = value
        return result

    def resolve_path(self, path: str) -> str:
        """Resolve a config-relative path against the project directory."""
        candidate = Path(path)
        if candidate.is_absolute():
            return str(candidate)
        return str(self.project_dir / candidate)

    def get_step_config(self, step_name: str) -> Dict[str, Any]:
        """Get configuration for a specific pipeline step with global config merging."""
        if 'steps' not in self.base_config:
            raise ConfigurationError("No steps configuration found in base config")

        if step_name not in self.base_config['steps']:
            raise ConfigurationError(f"Step '{step_name}' not found in configuration")

        step_info = self.base_config['steps'][step_name]

        if not step_info.get('enabled', False):
            raise ConfigurationError(f"Step '{step_name}' is disabled in configuration")

        step_config: Dict[str, Any] = {}
        config_file = step_info.get('config_file')
        if config_file:
            resolved = self.resolve_path(config_file)
            if os.path.exists(resolved):
                step_config = self._load_config(resolved)

        merged_config = self._merge_global_config(step_config)
        return self._apply_overrides(merged_config)

    def get_pipeline_config(self) -> Dict[str, Any]:
        """Get the main pipeline configuration."""
        return self.base_config

    def get_data_paths(self) -> Dict[str, str]:
        """Get per-run data directory paths (<root>/<run_id>/{tables,meshes,logs})."""
        return self._data_paths

    def get_run_id(self) -> str:
        """Return the current pipeline run identifier."""
        return self.run_id

    def _compute_run_scoped_paths(self) -> Dict[str, str]:
        """Compute run-scoped data directories based on config and run_id."""
        run_root = Path(self.output_root) / self.run_id
        return {
            'base': str(run_root),
            'tables': str(run_root / 'tables'),
            'meshes': str(run_root / 'meshes'),
            'logs': str(run_root / 'logs')
        }

    def _ensure_directories(self) -> None:
        """Create run-scoped directories if they do not exist."""
        for path in self._data_paths.values():
            Path(path).mkdir(parents=True, exist_ok=True)

    def validate_step_config(self, step_config: Dict[str, Any], required_fields: Iterable[str]) -> bool:
        """Validate that step configuration has required fields (dotted paths allowed)."""
        missing_fields: List[str] = []
        for field in required_fields:
            if self.lookup(step_config, field) is None:
                missing_fields.append(field)

        if missing_fields:
            raise ConfigurationError(f"Missing required configuration fields: {missing_fields}")

        return True

    @staticmethod
    def lookup(config: Dict[str, Any], key_path: str, default: Any = None) -> Any:
        """Get a value from a nested dict using dot notation (e.g. 'solver.tolerance')."""
        value: Any = config
        try:
            for key in key_path.split('.'):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def get_config_value(self, key_path: str, default: Any = None) -> Any:
        """Get base configuration value using dot notation (e.g., 'logging.level')."""
        return self.lookup(self.base_config, key_path, default)


def parse_override(assignment: str) -> Dict[str, Any]:
    """Parse a 'key.path=value' CLI assignment; the value is read as JSON when possible."""
    if '=' not in assignment:
        raise ConfigurationError(f"Override must look like key=value, got: {assignment}")
    key, raw = assignment.split('=', 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return {key.strip(): value}


def load_pipeline_config(config_path: str = "config/pipeline_config.json",
                         overrides: Optional[Dict[str, Any]] = None,
                         output_root: Optional[str] = None) -> ConfigLoader:
    """Load pipeline configuration and return ConfigLoader instance."""
    return ConfigLoader(config_path, overrides=overrides, output_root=output_root)
