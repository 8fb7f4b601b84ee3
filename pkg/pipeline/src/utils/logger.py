"""
Logging for the obstacle-lattice rate-function pipeline.

One process-wide PipelineLogger: a rotating file in the run's logs/ directory plus the
console. Long sweeps report through progress(), a tqdm bar that stays silent unless
show_progress is on and that logs a one-line summary when it closes.
"""

import json
import logging
import logging.handlers
import math
import os
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from tqdm import tqdm

DEFAULT_LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LEVEL_VARIABLE = 'OBSTACLE_LD_LOG_LEVEL'


def _level(name: Optional[str]) -> int:
    level = logging.getLevelName(str(name or 'INFO').upper())
    return level if isinstance(level, int) else logging.INFO


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return 'nan' if math.isnan(value) else f'{value:.4g}'
    if isinstance(value, dict):
        return '{' + ', '.join(f'{key}={_format_value(item)}' for key, item in value.items()) + '}'
    return str(value)


class PipelineLogger:
    """Centralized logging for the pipeline steps and compute modules."""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        logger = logging.getLogger('obstacle_ld')
        logger.setLevel(_level(os.getenv(LEVEL_VARIABLE) or self.config.get('level')))
        logger.propagate = False

        for handler in logger.handlers[:]:
            handler.close()
            logger.removeHandler(handler)

        formatter = logging.Formatter(self.config.get('format', DEFAULT_LOG_FORMAT))

        # Without a run directory (library and test use) only the console is written
        log_file = self.config.get('file')
        if log_file:
            log_dir = os.path.dirname(log_file)
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=int(self.config.get('max_size_mb', 100) * 1024 * 1024),
                backupCount=self.config.get('backup_count', 5),
                encoding='utf-8'
            )
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)
        return logger

    @property
    def log_file(self) -> Optional[str]:
        return self.config.get('file')

    def set_level(self, level: str) -> None:
        self.logger.setLevel(_level(level))

    def info(self, message: str, **kwargs) -> None:
        self.logger.info(message, extra=kwargs)

    def warning(self, message: str, **kwargs) -> None:
        self.logger.warning(message, extra=kwargs)

    def debug(self, message: str, **kwargs) -> None:
        self.logger.debug(message, extra=kwargs)

    def error(self, message: str, exception: Optional[Exception] = None, **kwargs) -> None:
        """Error line; with an exception, its message and traceback are attached."""
        if exception:
            self.logger.error(f"{message}: {exception}", exc_info=exception, extra=kwargs)
        else:
            self.logger.error(message, extra=kwargs)

    def critical(self, message: str, exception: Optional[Exception] = None, **kwargs) -> None:
        if exception:
            self.logger.critical(f"{message}: {exception}", exc_info=exception, extra=kwargs)
        else:
            self.logger.critical(message, extra=kwargs)

    def audit(self, title: str, values: Dict[str, Any], warn: bool = False) -> None:
        """One line summarising an audit dictionary, e.g. '🔎 f-table audit: nodes=61, ...'."""
        body = ', '.join(f'{key}={_format_value(value)}' for key, value in values.items())
        (self.warning if warn else self.info)(f"🔎 {title}: {body}")

    @contextmanager
    def progress(self, total: int, desc: str, unit: str, enabled: bool = False) -> Iterator[tqdm]:
        """tqdm bar over total units; the elapsed time is logged at DEBUG when it closes."""
        started = time.perf_counter()
        bar = tqdm(total=total, desc=desc, unit=unit, disable=not enabled, leave=False)
        try:
            yield bar
        finally:
            bar.close()
            self.debug(f"{desc}: {total} {unit} in {time.perf_counter() - started:.2f}s")


def _fallback_config(log_file: Optional[str] = None) -> Dict[str, Any]:
    return {
        'level': 'INFO',
        'format': DEFAULT_LOG_FORMAT,
        'file': log_file,
        'max_size_mb': 100,
        'backup_count': 5
    }


# Global logger instance
_logger: Optional[PipelineLogger] = None


def get_logger() -> PipelineLogger:
    """The global logger; console only until the runner initialises it."""
    global _logger
    if _logger is None:
        _logger = PipelineLogger(_fallback_config())
    return _logger


def initialize_logger(config_path: str, log_dir: Optional[str] = None) -> PipelineLogger:
    """Initialise from the pipeline config's logging block, writing the log file into log_dir."""
    global _logger

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            logging_config = dict(json.load(f)['logging'])
    except (OSError, KeyError, TypeError, json.JSONDecodeError):
        logging_config = _fallback_config()

    if log_dir:
        log_filename = os.path.basename(logging_config.get('file') or 'pipeline.log')
        logging_config['file'] = os.path.join(log_dir, log_filename)

    _logger = PipelineLogger(logging_config)
    return _logger


def reset_logger() -> None:
    """Drop the global logger, closing its handlers so the log file is released."""
    global _logger
    if _logger is not None:
        for handler in _logger.logger.handlers[:]:
            handler.close()
            _logger.logger.removeHandler(handler)
    _logger = None
