"""
CSV table writer/reader with JSON provenance sidecars.

Every table written by the pipeline is a pandas DataFrame saved as CSV next to a
`<stem>.json` file holding its provenance. The sidecar contains no timestamps so
reruns with an identical configuration produce identical files.
"""

import hashlib
import json
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from src import __version__
from src.utils.logger import get_logger


TRACKED_PACKAGES = ('numpy', 'scipy', 'pandas', 'meshpy')
FLOAT_FORMAT = '%.12g'


def to_serialisable(obj: Any) -> Any:
    """Recursively convert numpy types to Python native types."""
    if isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, dict):
        return {str(key): to_serialisable(value) for key, value in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [to_serialisable(item) for item in obj]
    return obj


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON encoding of a configuration dictionary."""
    canonical = json.dumps(to_serialisable(config), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'not-installed'
    return versions


def build_provenance(kind: str, metadata_block: Optional[Dict[str, Any]] = None,
                     config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Assemble the provenance dictionary stored next to a table."""
    provenance = {
        'kind': kind,
        'code_version': __version__,
        'package_versions': package_versions(),
        'metadata': to_serialisable(metadata_block or {}),
    }
    if config is not None:
        provenance['config_hash'] = config_hash(config)
    return provenance


def sidecar_path(csv_path: str) -> Path:
    return Path(csv_path).with_suffix('.json')


def write_table(frame: pd.DataFrame, csv_path: str, provenance: Optional[Dict[str, Any]] = None) -> str:
    """Write a DataFrame as CSV plus its JSON provenance sidecar; returns the CSV path."""
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    if provenance is not None:
        with open(sidecar_path(str(path)), 'w', encoding='utf-8') as f:
            json.dump(to_serialisable(provenance), f, indent=2, sort_keys=True)
    get_logger().debug(f"Wrote table {path} ({len(frame)} rows)")
    return str(path)


def read_table(csv_path: str) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Read a CSV table and its provenance sidecar (empty dict when absent)."""
    frame = pd.read_csv(csv_path)
    side = sidecar_path(csv_path)
    provenance: Dict[str, Any] = {}
    if side.exists():
        with open(side, 'r', encoding='utf-8') as f:
            provenance = json.load(f)
    return frame, provenance


def write_json(payload: Dict[str, Any], path: str) -> str:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8') as f:
        json.dump(to_serialisable(payload), f, indent=2, sort_keys=True)
    return str(target)
