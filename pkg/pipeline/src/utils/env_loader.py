"""
Environment Variables Loader

Handles loading run settings (output root, run id, slow-test switch) from .env files.
"""

import os
from pathlib import Path
from typing import Dict, Optional
from dotenv import load_dotenv


KNOWN_VARIABLES = {
    'output_root': 'OBSTACLE_LD_OUTPUT_ROOT',
    'run_id': 'OBSTACLE_LD_RUN_ID',
    'log_level': 'OBSTACLE_LD_LOG_LEVEL',
    'slow_tests': 'OBSTACLE_LD_SLOW_TESTS'
}


class EnvLoader:
    """Loads environment variables from .env files."""

    def __init__(self, env_file_path: Optional[str] = None):
        """
        Initialize the environment loader.

        Args:
            env_file_path: Path to the .env file. If None, looks for .env in the pipeline directory
        """
        if env_file_path is None:
            pipeline_dir = Path(__file__).parent.parent.parent
            env_file_path = pipeline_dir / '.env'

        self.env_file_path = Path(env_file_path)
        self.loaded = self._load_env_file()

    def _load_env_file(self) -> bool:
        """Load environment variables from the .env file; existing variables win."""
        if self.env_file_path.exists():
            load_dotenv(self.env_file_path, override=False)
            return True
        return False

    def get_setting(self, name: str, default: Optional[str] = None) -> Optional[str]:
        """
        Get a known setting by its short name.

        Args:
            name: Short name (e.g., 'output_root', 'run_id')
            default: Default value if the variable is not set

        Returns:
            Setting value or default
        """
        env_var = KNOWN_VARIABLES.get(name.lower())
        if env_var is None:
            raise KeyError(f"Unknown setting: {name}")
        return os.getenv(env_var, default)

    def get_all_settings(self) -> Dict[str, Optional[str]]:
        """Return every known setting (unset ones as None)."""
        return {name: os.getenv(var) for name, var in KNOWN_VARIABLES.items()}

    def flag(self, name: str) -> bool:
        """Interpret a known setting as a boolean switch."""
        value = self.get_setting(name, '') or ''
        return value.strip().lower() in ('1', 'true', 'yes', 'on')

    def get_env_var(self, var_name: str, default: Optional[str] = None) -> Optional[str]:
        """
        Get an environment variable with optional default value.

        Args:
            var_name: Environment variable name
            default: Default value if variable not found

        Returns:
            Environment variable value or default
        """
        return os.getenv(var_name, default)
