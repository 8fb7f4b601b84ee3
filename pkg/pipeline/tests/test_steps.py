#!/usr/bin/env python3
"""
Tests for the run configuration, the pipeline steps and the command-line runner.
"""

import math
import tempfile
import unittest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
from hypothesis import given, settings, strategies as st

import run_pipeline
from src.dense import NetworkParams, network_f
from src.eigen import FTable, TiltVector, square_p_grid
from src.steps import (
    CompareStep, DenseSolveStep, FSweepStep, FrontSpeedStep, MeshReportStep, ReproduceStep, RunConfig,
)
from src.transforms import legendre_transform, square_xi_grid
from src.utils import ConfigLoader, ConfigurationError, reset_logger
from src.utils.tables import read_table

CONFIG = str(Path(__file__).parent.parent / 'config' / 'pipeline_config.json')
HALF_PI = math.pi / 2


class TestRunConfig(unittest.TestCase):
    def test_defaults_are_valid(self):
        config = RunConfig()
        self.assertFalse(config.has_geometry)
        with self.assertRaises(ConfigurationError):
            config.cell_spec()

    def test_dict_round_trip(self):
        config = RunConfig(epsilon=0.01, p_grid='square', square_n=5, solver={'tolerance': 1e-9})
        self.assertEqual(RunConfig.from_dict(config.to_dict()), config)

    def test_hash_ignores_runtime_fields(self):
        config = RunConfig(obstacle_radius=1.0)
        runtime = config.with_changes(output_dir='/tmp/elsewhere', max_workers=8, parallel_processing=True,
                                      show_progress=True)
        self.assertEqual(config.config_hash(), runtime.config_hash())
        self.assertNotEqual(config.config_hash(), config.with_changes(mesh_size=0.05).config_hash())

    def test_both_geometry_keys_rejected(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(obstacle_radius=1.0, epsilon=0.01)

    def test_with_changes_clears_other_geometry_key(self):
        config = RunConfig(obstacle_radius=1.0).with_changes(epsilon=0.01)
        self.assertIsNone(config.obstacle_radius)
        self.assertAlmostEqual(config.cell_spec().obstacle_radius, math.pi - 0.01, places=14)

    def test_unknown_and_malformed_keys(self):
        with self.assertRaises(ConfigurationError):
            RunConfig.from_dict({'mesh_sise': 0.1})
        with self.assertRaises(ConfigurationError):
            RunConfig.from_dict({'mesh_size': 'coarse'})
        with self.assertRaises(ConfigurationError):
            RunConfig().with_changes(p_grid_kind='polar')

    def test_obstacle_too_large(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(obstacle_radius=3.5)

    def test_problems_collected(self):
        with self.assertRaises(ConfigurationError) as raised:
            RunConfig(p_grid='hexagonal', neighbours=3, max_workers=0)
        message = str(raised.exception)
        for fragment in ('p_grid', 'neighbours', 'max_workers'):
            self.assertIn(fragment, message)

    def test_cell_variant_checked(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(obstacle_radius=1.0, cell_variant='hexagon')

    def test_origin_only_square_grid(self):
        config = RunConfig(p_grid='square', square_n=1, p_max=0.0)
        self.assertEqual(config.tilt_grid(), [TiltVector()])

    def test_polar_grid_sizes(self):
        config = RunConfig(n_angles=8, n_radial=3, p_max=1.0)
        self.assertEqual(len(config.tilt_grid()), 1 + 8 * 3)
        self.assertEqual(len(config.polar_angles()), 8)
        np.testing.assert_allclose(config.polar_radii()[-1], 1.0)

    def test_polar_xi_points(self):
        config = RunConfig(xi_grid='polar', xi_angles=6, xi_n=4, xi_max=2.0)
        points = config.xi_points()
        self.assertEqual(len(points), 1 + 6 * 4)
        self.assertAlmostEqual(float(np.max(np.hypot(points[:, 0], points[:, 1]))), 2.0, places=12)

    def test_workers_need_parallel_flag(self):
        self.assertEqual(RunConfig(max_workers=4).workers, 1)
        self.assertEqual(RunConfig(max_workers=4, parallel_processing=True).workers, 4)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(1e-3, 1.0), st.floats(0.0, 20.0))
    def test_bound_slack_scales_with_mesh(self, mesh_size, factor):
        config = RunConfig(mesh_size=mesh_size, bound_slack_factor=factor)
        self.assertAlmostEqual(config.bound_slack(), factor * mesh_size ** 2, delta=1e-12 * (1.0 + factor))


class StepTestCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.output_root = self._tmp.name

    def tearDown(self):
        reset_logger()
        self._tmp.cleanup()

    def loader(self, **overrides) -> ConfigLoader:
        return ConfigLoader(CONFIG, overrides=overrides, output_root=self.output_root)


class TestConfigMerging(StepTestCase):
    def test_step_file_over_global(self):
        step = FrontSpeedStep(self.loader())
        self.assertEqual(step.run_config.epsilon, 0.01)
        self.assertEqual(step.run_config.mesh_size, 0.1)

    def test_override_over_step_file(self):
        step = FrontSpeedStep(self.loader(**{'geometry.epsilon': 0.05, 'performance.max_workers': 2}))
        self.assertEqual(step.run_config.epsilon, 0.05)
        self.assertEqual(step.run_config.max_workers, 2)
        self.assertEqual(step.run_config.workers, 1)

    def test_conflicting_geometry_override(self):
        with self.assertRaises(ConfigurationError):
            FSweepStep(self.loader(**{'geometry.epsilon': 0.01}))

    def test_missing_required_field(self):
        with self.assertRaises(ConfigurationError):
            FrontSpeedStep(self.loader(**{'dispersion.alpha_r': None}))

    def test_outputs_under_run_directory(self):
        step = FrontSpeedStep(self.loader())
        self.assertTrue(step.table_path('x.csv').startswith(self.output_root))
        self.assertTrue(Path(step.data_paths['meshes']).is_dir())


class TestFrontSpeedStep(StepTestCase):
    def test_network_model(self):
        result = FrontSpeedStep(self.loader()).execute()
        self.assertTrue(result['success'], result.get('error'))
        self.assertEqual(result['rows'], 4)
        self.assertLess(result['max_dual_mismatch'], 1e-3)
        frame, provenance = read_table(result['output_file'])
        self.assertTrue(np.all(frame['speed'] > 0.0))
        self.assertEqual(provenance['config_hash'], result['config_hash'])

    def test_quadratic_model(self):
        overrides = {'dispersion.model': 'quadratic', 'dispersion.kappa': 0.5, 'dispersion.alpha_r': [0.1],
                     'dispersion.directions': [[1.0, 0.0]]}
        result = FrontSpeedStep(self.loader(**overrides)).execute()
        self.assertTrue(result['success'], result.get('error'))
        frame, _ = read_table(result['output_file'])
        self.assertAlmostEqual(frame['speed'].iloc[0] / (2.0 * math.sqrt(0.05)), 1.0, delta=1e-6)

    def test_unknown_model(self):
        result = FrontSpeedStep(self.loader(**{'dispersion.model': 'lattice-gas'})).execute()
        self.assertFalse(result['success'])
        self.assertEqual(result['error_kind'], 'configuration')

    def test_table_model_needs_input(self):
        result = FrontSpeedStep(self.loader(**{'dispersion.model': 'table'})).execute()
        self.assertEqual(result['error_kind'], 'configuration')


class TestCompareStep(StepTestCase):
    def test_closed_form_models(self):
        result = CompareStep(self.loader(**{'dispersion.xi_magnitudes': [0.005, 0.01, 0.02]})).execute()
        self.assertTrue(result['success'], result.get('error'))
        self.assertEqual(result['directions'], 2)
        self.assertLess(result['max_relative_difference']['quadratic'], 0.05)
        self.assertEqual(set(result['max_pairwise_difference']), {'quadratic/network'})
        for path in result['output_files']:
            self.assertTrue(Path(path).exists())

    def test_missing_rate_file(self):
        step = CompareStep(self.loader(), {'input': str(Path(self.output_root) / 'absent.csv')})
        self.assertEqual(step.execute()['error_kind'], 'configuration')


class TestDenseSolveStep(StepTestCase):
    def test_small_f_law_reproduces_network(self):
        overrides = {'dense.d_source': 'small_f', 'transforms.n_radial': 12, 'transforms.xi_n': 21}
        result = DenseSolveStep(self.loader(**overrides)).execute()
        self.assertTrue(result['success'], result.get('error'))
        self.assertEqual(result['failed_nodes'], 0)

        ftable = FTable.read_csv(result['ftable_file'])
        expected = network_f(ftable.points(), NetworkParams(0.01))
        np.testing.assert_allclose(ftable.values(), expected, rtol=1e-8, atol=1e-14)
        self.assertTrue(Path(result['output_file']).exists())

    def test_unknown_d_source(self):
        result = DenseSolveStep(self.loader(**{'dense.d_source': 'guess'})).execute()
        self.assertEqual(result['error_kind'], 'configuration')


class TestMeshAndSweepSteps(StepTestCase):
    def test_mesh_report_and_reuse(self):
        mesh_file = str(Path(self.output_root) / 'cell.mesh')
        built = MeshReportStep(self.loader(**{'geometry.mesh_size': 0.3}), {'mesh_out': mesh_file}).execute()
        self.assertTrue(built['success'], built.get('error'))
        self.assertEqual(built['problems'], [])
        fluid_area = 4.0 * math.pi ** 2 - math.pi * HALF_PI ** 2
        self.assertAlmostEqual(built['area'] / fluid_area, 1.0, delta=0.01)

        reused = MeshReportStep(self.loader(), {'mesh_in': mesh_file}).execute()
        self.assertEqual(reused['n_vertices'], built['n_vertices'])

    def test_unknown_mesh_kind(self):
        result = MeshReportStep(self.loader(**{'mesh.kind': 'hexagon'})).execute()
        self.assertEqual(result['error_kind'], 'configuration')

    def test_origin_only_sweep(self):
        overrides = {'geometry.mesh_size': 0.3, 'transforms.p_grid': 'square', 'transforms.square_n': 1,
                     'transforms.p_max': 0.0}
        result = FSweepStep(self.loader(**overrides)).execute()
        self.assertTrue(result['success'], result.get('error'))
        self.assertEqual(result['nodes'], 1)
        ftable = FTable.read_csv(result['output_file'])
        self.assertLess(abs(ftable.values()[0]), 1e-10)


class QuadraticRateReproduce(ReproduceStep):
    """Reproduce step whose FEM and asymptotic rates are small quadratic tables."""

    KAPPAS = {'fem': 0.12, 'asymptotic': 0.125}

    def _rate(self, run_config, source):
        tilts = square_p_grid(21, 2.0, quadrant=False)
        ftable = FTable.from_values(tilts, [self.KAPPAS[source] * t.norm_sq for t in tilts])
        return legendre_transform(ftable, square_xi_grid(5, 0.2))


class TestReproduceStep(StepTestCase):
    def test_alias_resolution(self):
        step = ReproduceStep(self.loader())
        self.assertEqual(step.resolve_target('fig2a'), 'rate_contours_dilute')
        self.assertEqual(step.resolve_target('canonical'), 'canonical_fields')
        self.assertEqual(step.resolve_target('dense_contours'), 'dense_contours')
        with self.assertRaises(ConfigurationError):
            step.resolve_target('fig9')

    def test_unknown_target(self):
        result = ReproduceStep(self.loader(), {'target': 'fig9'}).execute()
        self.assertFalse(result['success'])
        self.assertEqual(result['error_kind'], 'configuration')

    def test_unknown_kind(self):
        result = ReproduceStep(self.loader(**{'targets.bogus': {'kind': 'histogram'}}), {'target': 'bogus'}).execute()
        self.assertEqual(result['error_kind'], 'configuration')

    def test_network_profiles(self):
        overrides = {'targets.concentration_profiles.rate_source': 'network',
                     'targets.concentration_profiles.epsilons': [0.01],
                     'targets.concentration_profiles.n_radii': 11}
        result = ReproduceStep(self.loader(**overrides), {'target': 'fig3'}).execute()
        self.assertTrue(result['success'], result.get('error'))
        self.assertEqual(result['target'], 'concentration_profiles')
        frame, _ = read_table(result['output_files'][0])
        self.assertEqual(result['rows'], 2 * 5 * 11)
        self.assertEqual(set(frame['model']), {'network', 'gaussian'})
        for column in ('tau', 'x_over_2pi', 'epsilon'):
            self.assertIn(column, frame.columns)
        self.assertAlmostEqual(float(frame['theta_norm'].max()), 1.0, places=12)

    def test_dense_contours_grid(self):
        step = QuadraticRateReproduce(self.loader(**{'targets.dense_contours.epsilons': [0.01]}), {'target': 'fig6'})
        result = step.execute()
        self.assertTrue(result['success'], result.get('error'))
        grid = [path for path in result['output_files'] if Path(path).name == 'dense_grid_eps_0.01.csv']
        self.assertEqual(len(grid), 1)
        frame, _ = read_table(grid[0])
        self.assertEqual(list(frame.columns), ['xi_x', 'xi_y', 'g_fem', 'flag_fem', 'g_asymptotic', 'flag_asymptotic'])
        self.assertEqual(len(frame), 25)
        squared = frame['xi_x'] ** 2 + frame['xi_y'] ** 2
        np.testing.assert_allclose(frame['g_fem'], squared / 0.48, atol=1e-6)
        np.testing.assert_allclose(frame['g_asymptotic'], squared / 0.5, atol=1e-6)


class TestCommandLine(StepTestCase):
    def run_cli(self, *argv) -> int:
        return run_pipeline.main(['--config', CONFIG, '--output-dir', self.output_root, *argv])

    def test_front_speed_succeeds(self):
        self.assertEqual(self.run_cli('front-speed'), 0)

    def test_obstacle_too_large_is_configuration_error(self):
        self.assertEqual(self.run_cli('--set', 'geometry.obstacle_radius=3.5', 'f-sweep'), 2)

    def test_malformed_override(self):
        self.assertEqual(self.run_cli('--set', 'geometry.epsilon', 'front-speed'), 2)

    def test_bad_worker_count(self):
        self.assertEqual(self.run_cli('--workers', '0', 'front-speed'), 2)

    def test_unknown_reproduce_target(self):
        self.assertEqual(self.run_cli('reproduce', 'fig9'), 2)

    def test_argparse_errors_exit_two(self):
        with self.assertRaises(SystemExit) as raised:
            self.run_cli('no-such-step')
        self.assertEqual(raised.exception.code, 2)

    def test_log_file_in_run_directory(self):
        self.assertEqual(self.run_cli('front-speed'), 0)
        logs = list(Path(self.output_root).glob('*/logs/pipeline.log'))
        self.assertEqual(len(logs), 1)
        self.assertIn('front_speed step completed', logs[0].read_text(encoding='utf-8'))

    def test_json_override_values(self):
        argv = ['--set', 'dispersion.alpha_r=[0.5]', '--set', 'dispersion.directions=[[0, 1]]', 'front-speed']
        self.assertEqual(self.run_cli(*argv), 0)
        written = list(Path(self.output_root).glob('*/tables/front_speeds_network.csv'))
        self.assertEqual(len(written), 1)
        frame, _ = read_table(str(written[0]))
        self.assertEqual(len(frame), 1)


if __name__ == '__main__':
    unittest.main()
