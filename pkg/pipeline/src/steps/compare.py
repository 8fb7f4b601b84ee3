"""
Compare step: FEM / dense-asymptotic / network / quadratic rate functions along rays.
"""

from typing import Any, Dict, List

import numpy as np

from src.dispersion.compare import compare_models
from src.steps.base import PipelineStep
from src.transforms.legendre import RateTable


def magnitude_grid(grid) -> np.ndarray:
    """|ξ| samples from either an explicit list or {start, stop, n}."""
    if isinstance(grid, dict):
        return np.linspace(float(grid['start']), float(grid['stop']), int(grid['n']))
    return np.asarray(grid, dtype=float)


def direction_label(direction) -> str:
    return '_'.join(f'{float(component):g}' for component in direction)


class CompareStep(PipelineStep):
    step_name = 'compare'
    required_fields = ['dispersion.directions', 'dispersion.xi_magnitudes']

    def run(self) -> Dict[str, Any]:
        epsilon = self.run_config.cell_spec().epsilon
        fem_source = self.input_path()
        asymptotic_source = self.input_path('asymptotic_input')
        fem_rate = RateTable.read_csv(fem_source) if fem_source else None
        asymptotic_rate = RateTable.read_csv(asymptotic_source) if asymptotic_source else None
        magnitudes = magnitude_grid(self.setting('dispersion.xi_magnitudes'))

        outputs: List[str] = []
        worst: Dict[str, float] = {}
        pairwise: Dict[str, float] = {}
        for direction in self.setting('dispersion.directions'):
            comparison = compare_models(epsilon, direction, magnitudes, fem_rate=fem_rate,
                                        asymptotic_rate=asymptotic_rate, kappa=self.setting('dispersion.kappa'))
            outputs.append(comparison.to_csv(self.table_path(f'compare_{direction_label(direction)}.csv'),
                                             self.provenance_config()))
            for model, value in comparison.summary['max_relative_difference'].items():
                worst[model] = max(worst.get(model, 0.0), value)
            for pair, value in comparison.summary['max_pairwise_difference'].items():
                pairwise[pair] = max(pairwise.get(pair, 0.0), value)

        return {
            'epsilon': epsilon,
            'directions': len(outputs),
            'max_relative_difference': worst,
            'max_pairwise_difference': pairwise,
            'output_files': outputs,
        }
