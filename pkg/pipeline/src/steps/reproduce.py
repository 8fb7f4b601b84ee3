"""
Reproduce step: regenerate the data behind a published plot from a named target.

Targets live in the step configuration under 'targets' (parameters pre-filled) and may be
reached through 'aliases'. Each target has a 'kind' naming its handler, an optional
'run_config' block of RunConfig field overrides, and optional '<source>_run_config'
blocks applied when that rate source is computed.
"""

import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.dense.canonical import CanonicalProblem, DTable, canonical_field
from src.dense.network import network_g
from src.dispersion.compare import compare_models
from src.dispersion.profiles import concentration_profile, gaussian_profile, times_from_tau
from src.geometry.cell import ASTROID_AREA
from src.steps.base import PipelineStep
from src.steps.compare import direction_label, magnitude_grid
from src.steps.run_config import RunConfig
from src.steps.workflows import (
    audit_ftable, audit_rate, canonical_dtable, cell_mesh, dense_ftable, fem_ftable, rate_from_ftable,
)
from src.transforms.closed_forms import keller_kappa_eps, maxwell_kappa, quadratic_g
from src.transforms.legendre import RateTable, fit_kappa_contour
from src.utils.errors import ConfigurationError
from src.utils.tables import build_provenance, write_table

RATE_SOURCES = ('fem', 'asymptotic', 'network')
QUADRATIC_CHOICES = ('maxwell', 'fit', 'keller')

Rate = Union[RateTable, Callable[[np.ndarray], np.ndarray]]


def _eps_label(epsilon: float) -> str:
    return f'eps_{epsilon:g}'


class ReproduceStep(PipelineStep):
    step_name = 'reproduce'
    required_fields = ['targets']

    def __init__(self, config_loader, options: Optional[Dict[str, Any]] = None):
        super().__init__(config_loader, options)
        self._dtable: Optional[DTable] = None
        self.handlers = {
            'rate_contours': self._rate_contours,
            'profiles': self._profiles,
            'cross_sections': self._cross_sections,
            'dense_contours': self._dense_contours,
            'canonical_functionals': self._canonical_functionals,
            'canonical_fields': self._canonical_fields,
        }

    # ------------------------------------------------------------------
    # Target resolution and output helpers
    # ------------------------------------------------------------------

    def resolve_target(self, requested: Optional[str]) -> str:
        targets = self.setting('targets', {})
        aliases = self.setting('aliases', {}) or {}
        if not requested:
            raise ConfigurationError("reproduce needs a target name")
        name = aliases.get(requested, requested)
        if name not in targets:
            known = sorted(set(targets) | set(aliases))
            raise ConfigurationError(f"unknown reproduction target '{requested}' (known: {known})")
        return name

    def _target_path(self, name: str) -> str:
        path = Path(self.data_paths['tables']) / self.target
        path.mkdir(parents=True, exist_ok=True)
        return str(path / name)

    def _write(self, frame: pd.DataFrame, name: str, kind: str, metadata: Dict[str, Any],
               run_config: RunConfig) -> str:
        metadata = dict(metadata, target=self.target)
        path = write_table(frame, self._target_path(name), build_provenance(kind, metadata, run_config.provenance_config()))
        self.outputs.append(path)
        return path

    def _source_config(self, run_config: RunConfig, source: str) -> RunConfig:
        return run_config.with_changes(**self.params.get(f'{source}_run_config', {}))

    # ------------------------------------------------------------------
    # Rate sources
    # ------------------------------------------------------------------

    def _canonical_table(self, run_config: RunConfig) -> DTable:
        if self._dtable is None:
            self._dtable = canonical_dtable(run_config)
            self._dtable.to_csv(self._target_path('dtable.csv'), run_config.provenance_config())
            self.outputs.append(self._target_path('dtable.csv'))
        return self._dtable

    def _rate(self, run_config: RunConfig, source: str) -> Rate:
        """Rate function of one model at the run configuration's geometry; tables are saved alongside."""
        if source not in RATE_SOURCES:
            raise ConfigurationError(f"rate source must be one of {RATE_SOURCES}, got '{source}'")
        epsilon = run_config.cell_spec().epsilon
        if source == 'network':
            params = run_config.network_params()
            return lambda xi: network_g(xi, params)

        config = self._source_config(run_config, source)
        label = f'{source}_{_eps_label(epsilon)}'
        if source == 'fem':
            ftable = fem_ftable(config, cell_mesh(config))
            ftable.metadata['audit'] = audit_ftable(ftable, config)
        else:
            ftable = dense_ftable(config, self._canonical_table(config))
        self.outputs.append(ftable.to_csv(self._target_path(f'{label}_ftable.csv'), config.provenance_config()))

        rate = rate_from_ftable(config, ftable)
        rate.metadata['audit'] = audit_rate(config, ftable, rate)
        self.outputs.append(rate.to_csv(self._target_path(f'{label}_rate.csv'), config.provenance_config()))
        return rate

    # ------------------------------------------------------------------
    # Handlers
    # ------------------------------------------------------------------

    def _write_levels(self, levels: List[float], run_config: RunConfig, kappa: Optional[float] = None) -> str:
        frame = pd.DataFrame({'level': [float(level) for level in levels]})
        if kappa is not None:
            # Quadratic contours g = |ξ|²/(4κ) are circles of radius 2√(κ·level)
            frame['kappa'] = kappa
            frame['quadratic_radius'] = 2.0 * np.sqrt(kappa * frame['level'])
        return self._write(frame, 'contour_levels.csv', 'contour_levels', {'kappa': kappa}, run_config)

    def _rate_contours(self, run_config: RunConfig) -> Dict[str, Any]:
        """g over a ξ grid beside its quadratic approximation (Maxwell, best-fit or Keller κ)."""
        choice = self.params.get('quadratic', 'keller')
        if choice not in QUADRATIC_CHOICES:
            raise ConfigurationError(f"quadratic must be one of {QUADRATIC_CHOICES}, got '{choice}'")
        spec = run_config.cell_spec()
        rate = self._rate(run_config, 'fem')
        if choice == 'maxwell':
            kappa = maxwell_kappa(spec.sigma)
        elif choice == 'keller':
            kappa = keller_kappa_eps(spec.epsilon)
        else:
            kappa = fit_kappa_contour(rate, run_config.kappa_fit_radius)

        frame = rate.frame.copy()
        frame['g_quadratic'] = quadratic_g(kappa, rate.points())
        self._write(frame, 'rate_grid.csv', 'rate_grid', {'kappa': kappa, 'quadratic': choice}, run_config)
        self._write_levels(self.params.get('levels', []), run_config, kappa)

        levels = self.params.get('levels') or [math.inf]
        interior = frame[(frame['flag'] != 'boundary') & (frame['g'] > 0.0) & (frame['g'] <= max(levels))]
        deviation = float(np.max(np.abs(interior['g_quadratic'] / interior['g'] - 1.0))) if len(interior) else None
        return {'kappa': kappa, 'quadratic': choice, 'max_relative_quadratic_deviation': deviation}

    def _profiles(self, run_config: RunConfig) -> Dict[str, Any]:
        """θ/θ* along one direction at τ = κt/(4π²) multiples, against the Gaussian with Keller κ."""
        direction = self.params.get('direction', [1.0, 1.0])
        tau = self.params.get('tau', [1, 2, 3, 4, 5])
        radii = 2.0 * math.pi * np.linspace(0.0, float(self.params.get('x_over_2pi_max', 30.0)),
                                            int(self.params.get('n_radii', 121)))
        source = self.params.get('rate_source', 'fem')
        frames = []
        for epsilon in self.params.get('epsilons', [0.01]):
            config = run_config.with_changes(epsilon=float(epsilon))
            kappa = keller_kappa_eps(float(epsilon))
            times = times_from_tau(tau, kappa)
            rate = self._rate(config, source)
            for profile in (concentration_profile(rate, direction, times, radii, model=source),
                            gaussian_profile(kappa, direction, times, radii)):
                frame = profile.to_frame()
                frame['tau'] = np.repeat(np.asarray(tau, dtype=float), len(radii))
                frame['x_over_2pi'] = frame['radius'] / (2.0 * math.pi)
                frame['epsilon'] = float(epsilon)
                frames.append(frame)
        combined = pd.concat(frames, ignore_index=True)
        self._write(combined, 'profiles.csv', 'profiles', {'direction': direction, 'rate_source': source},
                    run_config)
        return {'rows': len(combined), 'rate_source': source}

    def _cross_sections(self, run_config: RunConfig) -> Dict[str, Any]:
        """g against |ξ| along rays for each ε: computed models beside the network and quadratic-Keller."""
        magnitudes = magnitude_grid(self.params.get('xi_magnitudes', {'start': 0.0, 'stop': 5.0, 'n': 51}))
        models = self.params.get('models', ['fem'])
        worst: Dict[str, float] = {}
        for epsilon in self.params.get('epsilons', [0.01]):
            config = run_config.with_changes(epsilon=float(epsilon))
            rates = {model: self._rate(config, model) for model in models}
            for direction in self.params.get('directions', [[1.0, 0.0], [1.0, 1.0]]):
                comparison = compare_models(float(epsilon), direction, magnitudes, fem_rate=rates.get('fem'),
                                            asymptotic_rate=rates.get('asymptotic'))
                name = f'cross_section_{_eps_label(float(epsilon))}_dir_{direction_label(direction)}.csv'
                self._write(comparison.frame, name, 'model_comparison', comparison.summary, config)
                for model, value in comparison.summary['max_relative_difference'].items():
                    key = f'{model}@{_eps_label(float(epsilon))}'
                    worst[key] = max(worst.get(key, 0.0), value)
        return {'max_relative_difference': worst}

    def _dense_contours(self, run_config: RunConfig) -> Dict[str, Any]:
        """FEM and dense-asymptotic g on a shared ξ grid for each ε."""
        for epsilon in self.params.get('epsilons', [0.01]):
            config = run_config.with_changes(epsilon=float(epsilon))
            fem = self._rate(config, 'fem')
            asymptotic = self._rate(config, 'asymptotic')
            if not np.allclose(fem.points(), asymptotic.points()):
                raise ConfigurationError("FEM and asymptotic rate tables must share the ξ grid")
            frame = fem.frame[['xi_x', 'xi_y', 'g', 'flag']].rename(columns={'g': 'g_fem', 'flag': 'flag_fem'})
            frame['g_asymptotic'] = asymptotic.frame['g'].to_numpy()
            frame['flag_asymptotic'] = asymptotic.frame['flag'].to_numpy()
            self._write(frame, f'dense_grid_{_eps_label(float(epsilon))}.csv', 'dense_grid',
                        {'epsilon': float(epsilon)}, config)
        self._write_levels(self.params.get('levels', []), run_config)
        return {'epsilons': list(self.params.get('epsilons', [0.01]))}

    def _canonical_functionals(self, run_config: RunConfig) -> Dict[str, Any]:
        """D_i against f₀ with the small-f₀ asymptote 1/(π𝒜f₀)."""
        dtable = self._canonical_table(run_config)
        frame = dtable.frame.copy()
        frame['D_small_f'] = 1.0 / (math.pi * ASTROID_AREA * frame['f0'])
        self._write(frame, 'canonical_functionals.csv', 'canonical_functionals', dtable.metadata, run_config)
        return {'nodes': len(frame), 'max_d4_d2_mismatch': dtable.metadata.get('max_d4_d2_mismatch')}

    def _canonical_fields(self, run_config: RunConfig) -> Dict[str, Any]:
        spec = run_config.astroid_spec()
        problem = CanonicalProblem(spec)
        f0_values = [float(f0) for f0 in self.params.get('f0', [0.01, 1.0, 10.0])]
        for f0 in f0_values:
            self._write(canonical_field(f0, spec, problem), f'canonical_field_f0_{f0:g}.csv', 'canonical_field',
                        {'f0': f0, 'trim_distance': spec.trim_distance}, run_config)
        return {'f0': f0_values}

    # ------------------------------------------------------------------

    def run(self) -> Dict[str, Any]:
        requested = self.options.get('target')
        self.target = self.resolve_target(requested)
        self.params = dict(self.setting('targets')[self.target])
        kind = self.params.get('kind')
        if kind not in self.handlers:
            raise ConfigurationError(f"target '{self.target}' has unknown kind '{kind}'")
        self.outputs: List[str] = []

        run_config = self.run_config.with_changes(**self.params.get('run_config', {}))
        self.logger.info(f"🎯 Reproducing '{self.target}' ({kind})"
                         + (f" via alias '{requested}'" if requested != self.target else ""))
        summary = self.handlers[kind](run_config)
        return dict(summary, target=self.target, requested=requested, kind=kind, output_files=list(self.outputs))
