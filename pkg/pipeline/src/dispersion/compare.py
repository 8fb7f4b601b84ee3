"""
Side-by-side rate functions along one ray: FEM, dense asymptotic, network and quadratic.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.dense.network import NetworkParams, network_g
from src.dispersion.profiles import RateSource, evaluate_rate
from src.transforms.closed_forms import keller_kappa_eps, quadratic_g
from src.transforms.legendre import ray_xi_grid, unit_vector
from src.utils.errors import ConfigurationError
from src.utils.logger import get_logger
from src.utils.tables import build_provenance, write_table


@dataclass
class ModelComparison:
    frame: pd.DataFrame
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_csv(self, path: str, config: Optional[Dict[str, Any]] = None) -> str:
        return write_table(self.frame, path, build_provenance('model_comparison', self.summary, config))


def _relative(values: np.ndarray, reference: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(reference != 0.0, (values - reference) / reference, np.nan)


def _max_abs(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return float(np.max(np.abs(finite))) if len(finite) else float('nan')


def compare_models(epsilon: float, direction, xi_magnitudes: Sequence[float],
                   fem_rate: Optional[RateSource] = None, asymptotic_rate: Optional[RateSource] = None,
                   kappa: Optional[float] = None) -> ModelComparison:
    """
    Aligned g values along ξ = s·e with the relative difference of every model pair.

    Models are ordered fem, asymptotic, network, quadratic; the column rel_<a>_<b>
    holds (g_a − g_b)/g_b for each later model a and earlier model b. The first model
    present is the reference summarised in max_relative_difference. The quadratic
    model uses the dense-limit diffusivity unless kappa is given.
    """
    magnitudes = np.asarray(xi_magnitudes, dtype=float)
    if not len(magnitudes):
        raise ConfigurationError("compare_models needs at least one |ξ| value")
    xi = ray_xi_grid(direction, magnitudes)
    params = NetworkParams(epsilon)
    kappa = keller_kappa_eps(epsilon) if kappa is None else kappa

    columns: Dict[str, np.ndarray] = {}
    if fem_rate is not None:
        columns['fem'] = evaluate_rate(fem_rate, xi)
    if asymptotic_rate is not None:
        columns['asymptotic'] = evaluate_rate(asymptotic_rate, xi)
    columns['network'] = np.asarray(network_g(xi, params), dtype=float)
    columns['quadratic'] = np.asarray(quadratic_g(kappa, xi), dtype=float)

    models = list(columns)
    reference = models[0]
    frame = pd.DataFrame({'xi': magnitudes, 'xi_x': xi[:, 0], 'xi_y': xi[:, 1]})
    for name, values in columns.items():
        frame[f'g_{name}'] = values

    pairwise: Dict[str, float] = {}
    for earlier, later in combinations(models, 2):
        relative = _relative(columns[later], columns[earlier])
        frame[f'rel_{later}_{earlier}'] = relative
        pairwise[f'{later}/{earlier}'] = _max_abs(relative)

    summary: Dict[str, Any] = {
        'epsilon': epsilon,
        'direction': unit_vector(direction),
        'kappa': kappa,
        'reference': reference,
        'max_relative_difference': {name: pairwise[f'{name}/{reference}'] for name in models[1:]},
        'max_pairwise_difference': pairwise,
    }

    get_logger().info(f"📊 Model comparison vs {reference}: "
                      + ", ".join(f"{k}={v:.3%}" for k, v in summary['max_relative_difference'].items()))
    return ModelComparison(frame, summary)
