"""
Sampled eigenvalue function f(p) and its CSV form.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.eigen.tilt import TiltVector
from src.utils.errors import TableRangeError
from src.utils.tables import build_provenance, read_table, write_table


FTABLE_COLUMNS = ['p', 'q', 'f', 'residual', 'iterations', 'status', 'error']


@dataclass
class FTable:
    """One row per tilt node; failed nodes keep status 'failed' and f = NaN."""

    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        frame = self.frame.copy()
        for column, default in (('residual', 0.0), ('iterations', 0), ('status', 'ok'), ('error', '')):
            if column not in frame.columns:
                frame[column] = default
        frame['error'] = frame['error'].fillna('')
        self.frame = frame[FTABLE_COLUMNS].reset_index(drop=True)

    @classmethod
    def from_values(cls, tilts: Sequence[TiltVector], values: Iterable[float],
                    metadata: Optional[Dict[str, Any]] = None) -> 'FTable':
        frame = pd.DataFrame({
            'p': [t.p for t in tilts],
            'q': [t.q for t in tilts],
            'f': list(values),
        })
        return cls(frame, dict(metadata or {}))

    @classmethod
    def from_function(cls, f_eval: Callable[[TiltVector], float], tilts: Sequence[TiltVector],
                      metadata: Optional[Dict[str, Any]] = None) -> 'FTable':
        return cls.from_values(tilts, [float(f_eval(t)) for t in tilts], metadata)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def ok_frame(self) -> pd.DataFrame:
        return self.frame[(self.frame['status'] == 'ok') & np.isfinite(self.frame['f'])]

    @property
    def n_failed(self) -> int:
        return int(np.sum(self.frame['status'] != 'ok'))

    def points(self) -> np.ndarray:
        ok = self.ok_frame
        return ok[['p', 'q']].to_numpy(dtype=float)

    def values(self) -> np.ndarray:
        return self.ok_frame['f'].to_numpy(dtype=float)

    def tilts(self) -> List[TiltVector]:
        return [TiltVector(p, q) for p, q in self.points()]

    def value_at(self, tilt: TiltVector, tolerance: float = 1e-9) -> float:
        points = self.points()
        distance = np.max(np.abs(points - tilt.as_array()), axis=1) if len(points) else np.array([])
        if not len(distance) or np.min(distance) > tolerance:
            raise TableRangeError(f"tilt ({tilt.p}, {tilt.q}) is not a node of the table")
        return float(self.values()[int(np.argmin(distance))])

    def p_max(self) -> float:
        points = self.points()
        return float(np.max(np.linalg.norm(points, axis=1))) if len(points) else 0.0

    def bound_violations(self, slack: float = 0.0) -> pd.DataFrame:
        """Nodes outside 0 ≤ f ≤ |p|²(1 + slack)."""
        ok = self.ok_frame
        bound = (ok['p'] ** 2 + ok['q'] ** 2) * (1.0 + slack)
        return ok[(ok['f'] > bound + 1e-12) | (ok['f'] < -1e-10)]

    def to_csv(self, path: str, config: Optional[Dict[str, Any]] = None) -> str:
        provenance = build_provenance('ftable', self.metadata, config)
        return write_table(self.frame, path, provenance)

    @classmethod
    def read_csv(cls, path: str) -> 'FTable':
        frame, provenance = read_table(path)
        return cls(frame, provenance.get('metadata', {}))


def complete_symmetry(ftable: FTable, decimals: int = 12) -> FTable:
    """
    Expand a table over the lattice symmetry group: f(±p, ±q) = f(p, q) = f(q, p).
    Existing nodes win over mirrored copies.
    """
    ok = ftable.ok_frame
    rows = []
    for p, q, f, residual, iterations in ok[['p', 'q', 'f', 'residual', 'iterations']].itertuples(index=False):
        for a, b in ((p, q), (q, p)):
            for sa in (1.0, -1.0):
                for sb in (1.0, -1.0):
                    rows.append((sa * a, sb * b, f, residual, iterations, (a, b, sa, sb) != (p, q, 1.0, 1.0)))
    frame = pd.DataFrame(rows, columns=['p', 'q', 'f', 'residual', 'iterations', 'mirrored'])
    frame['p'] = frame['p'] + 0.0
    frame['q'] = frame['q'] + 0.0
    frame['key_p'] = frame['p'].round(decimals)
    frame['key_q'] = frame['q'].round(decimals)
    frame = frame.sort_values(['mirrored', 'key_p', 'key_q'], kind='mergesort')
    frame = frame.drop_duplicates(['key_p', 'key_q'], keep='first')
    frame = frame.sort_values(['key_p', 'key_q'], kind='mergesort')
    metadata = dict(ftable.metadata)
    metadata['symmetry_completed'] = True
    return FTable(frame[['p', 'q', 'f', 'residual', 'iterations']], metadata)
