#!/usr/bin/env python3
"""
Tests for concentration profiles, FKPP front speeds and model comparisons.
"""

import math
import tempfile
import unittest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pandas as pd

from src.dense import NetworkParams, network_f, network_g
from src.dispersion import (
    PROFILE_COLUMNS, compare_models, concentration_profile, evaluate_rate, fkpp_front_speed,
    front_speed_from_rate, gaussian_profile, times_from_tau,
)
from src.eigen import FTable, square_p_grid
from src.transforms import keller_kappa_eps, legendre_transform, quadratic_f, quadratic_g, square_xi_grid
from src.utils import ConfigurationError, CoverageError, TableRangeError

PARAMS = NetworkParams(0.01)
KAPPA = keller_kappa_eps(0.01)


def network_rate(xi):
    return network_g(xi, PARAMS)


def network_eigenvalue(tilt):
    return network_f(tilt, PARAMS)


class TestProfiles(unittest.TestCase):
    def setUp(self):
        self.times = times_from_tau([0.25, 1.0], KAPPA)
        self.radii = np.linspace(0.0, 100.0, 21)

    def test_times_from_tau(self):
        self.assertAlmostEqual(float(times_from_tau([1.0], 0.5)[0]), 8.0 * math.pi ** 2, places=12)

    def test_quadratic_rate_reproduces_gaussian(self):
        kappa = 0.3
        large_deviation = concentration_profile(lambda xi: quadratic_g(kappa, xi), (1.0, 1.0),
                                                self.times, self.radii)
        gaussian = gaussian_profile(kappa, (1.0, 1.0), self.times, self.radii)
        np.testing.assert_allclose(large_deviation.theta_norm, gaussian.theta_norm, rtol=1e-12, atol=1e-300)

    def test_rows_are_normalised_and_decreasing(self):
        profile = concentration_profile(network_rate, (1.0, 0.0), self.times, self.radii)
        np.testing.assert_allclose(np.max(profile.theta_norm, axis=1), 1.0)
        self.assertTrue(np.all(np.diff(profile.theta_norm, axis=1) <= 0.0))

    def test_network_tail_heavier_than_gaussian(self):
        network = concentration_profile(network_rate, (1.0, 1.0), self.times, self.radii, model='network')
        gaussian = gaussian_profile(KAPPA, (1.0, 1.0), self.times, self.radii)
        self.assertTrue(np.all(network.theta_norm[:, 1:] > gaussian.theta_norm[:, 1:]))
        self.assertGreater(network.theta_norm[1, -1] / gaussian.theta_norm[1, -1], 10.0)

    def test_frame_and_csv(self):
        profile = gaussian_profile(KAPPA, (0.0, 2.0), self.times, self.radii, source=(1.0, -1.0))
        frame = profile.to_frame()
        self.assertEqual(list(frame.columns), PROFILE_COLUMNS)
        self.assertEqual(len(frame), len(self.times) * len(self.radii))
        np.testing.assert_allclose(profile.positions()[-1], [1.0, 99.0])
        with tempfile.TemporaryDirectory() as tmp:
            written = pd.read_csv(profile.to_csv(str(Path(tmp) / 'profile.csv')))
        self.assertEqual(list(written['model'].unique()), ['gaussian'])

    def test_invalid_axes(self):
        with self.assertRaises(ConfigurationError):
            gaussian_profile(KAPPA, (1.0, 0.0), [0.0], self.radii)
        with self.assertRaises(ConfigurationError):
            gaussian_profile(KAPPA, (1.0, 0.0), self.times, [])
        with self.assertRaises(ConfigurationError):
            gaussian_profile(0.0, (1.0, 0.0), self.times, self.radii)


class TestRateTableSources(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        tilts = square_p_grid(41, 2.0, quadrant=False)
        ftable = FTable.from_values(tilts, [0.5 * t.norm_sq for t in tilts])
        cls.rate = legendre_transform(ftable, square_xi_grid(21, 3.0))

    def test_node_lookup_and_interpolation(self):
        np.testing.assert_allclose(evaluate_rate(self.rate, [(0.6, 0.3)]), [0.225], rtol=1e-9)
        self.assertAlmostEqual(float(evaluate_rate(self.rate, (0.5, 0.25))[0]), 0.15625, delta=1e-3)

    def test_boundary_nodes_raise(self):
        with self.assertRaises(CoverageError):
            evaluate_rate(self.rate, (3.0, 3.0))

    def test_profile_outside_table(self):
        with self.assertRaises(CoverageError):
            concentration_profile(self.rate, (1.0, 0.0), [1.0], [0.0, 10.0])

    def test_callable_shape_checked(self):
        with self.assertRaises(ConfigurationError):
            evaluate_rate(lambda xi: np.zeros(3), [(0.1, 0.0), (0.2, 0.0)])


class TestFrontSpeed(unittest.TestCase):
    def test_quadratic_speed(self):
        kappa, alpha_r = 0.5, 0.1
        speed = fkpp_front_speed(lambda p: quadratic_f(kappa, p), alpha_r, (1.0, 2.0),
                                 rate=lambda xi: quadratic_g(kappa, xi))
        self.assertAlmostEqual(speed.speed / (2.0 * math.sqrt(kappa * alpha_r)), 1.0, delta=1e-6)
        self.assertAlmostEqual(speed.p_star, math.sqrt(alpha_r / kappa), delta=1e-4)
        self.assertLess(speed.dual_mismatch, 1e-6)

    def test_network_dual_forms_agree(self):
        speed = fkpp_front_speed(network_eigenvalue, 0.1, (1.0, 0.0), rate=network_rate)
        self.assertLess(speed.dual_mismatch, 1e-5)
        self.assertAlmostEqual(front_speed_from_rate(network_rate, 0.1, (2.0, 0.0)), speed.level_set_speed,
                               places=12)

    def test_anisotropy(self):
        axis = fkpp_front_speed(network_eigenvalue, 1.0, (1.0, 0.0)).speed
        diagonal = fkpp_front_speed(network_eigenvalue, 1.0, (1.0, 1.0)).speed
        self.assertGreater(axis, 1.1 * diagonal)

    def test_monotone_in_reaction_rate(self):
        speeds = [fkpp_front_speed(network_eigenvalue, alpha_r, (1.0, 0.0)).speed
                  for alpha_r in (1e-4, 1e-3, 1e-2, 0.1, 1.0)]
        self.assertTrue(np.all(np.diff(speeds) > 0.0))
        self.assertLess(speeds[0], 0.01)
        self.assertTrue(math.isnan(fkpp_front_speed(network_eigenvalue, 0.1, (1.0, 0.0)).dual_mismatch))

    def test_tabulated_eigenvalue(self):
        tilts = square_p_grid(81, 2.0, quadrant=False)
        ftable = FTable.from_values(tilts, network_f(tilts, PARAMS))
        exact = fkpp_front_speed(network_eigenvalue, 0.1, (1.0, 0.0)).speed
        tabulated = fkpp_front_speed(ftable, 0.1, (1.0, 0.0)).speed
        self.assertAlmostEqual(tabulated / exact, 1.0, delta=1e-2)
        with self.assertRaises(TableRangeError):
            fkpp_front_speed(ftable, 1e5, (1.0, 0.0))

    def test_invalid_reaction_rate(self):
        for alpha_r in (0.0, -1.0):
            with self.assertRaises(ConfigurationError):
                fkpp_front_speed(network_eigenvalue, alpha_r, (1.0, 0.0))
            with self.assertRaises(ConfigurationError):
                front_speed_from_rate(network_rate, alpha_r, (1.0, 0.0))


class TestCompareModels(unittest.TestCase):
    def test_small_deviations_agree(self):
        comparison = compare_models(0.01, (1.0, 0.0), [0.005, 0.01, 0.02])
        self.assertEqual(list(comparison.frame.columns),
                         ['xi', 'xi_x', 'xi_y', 'g_network', 'g_quadratic', 'rel_quadratic_network'])
        self.assertEqual(comparison.summary['reference'], 'network')
        self.assertLess(comparison.summary['max_relative_difference']['quadratic'], 0.05)

    def test_quadratic_overestimates_tail(self):
        comparison = compare_models(0.01, (1.0, 1.0), [3.0])
        row = comparison.frame.iloc[0]
        self.assertGreater(row['g_quadratic'], row['g_network'])

    def test_asymptotic_reference(self):
        comparison = compare_models(0.01, (0.0, 1.0), [0.5, 1.0], asymptotic_rate=network_rate, kappa=0.2)
        self.assertEqual(comparison.summary['reference'], 'asymptotic')
        np.testing.assert_allclose(comparison.frame['rel_network_asymptotic'], 0.0, atol=1e-15)
        np.testing.assert_allclose(comparison.frame['g_quadratic'], [0.3125, 1.25])
        with tempfile.TemporaryDirectory() as tmp:
            path = comparison.to_csv(str(Path(tmp) / 'compare.csv'))
            self.assertTrue(Path(path).with_suffix('.json').exists())

    def test_every_model_pair(self):
        comparison = compare_models(0.01, (1.0, 1.0), [0.5, 1.0, 2.0], fem_rate=lambda xi: quadratic_g(0.15, xi),
                                    asymptotic_rate=network_rate, kappa=0.2)
        frame = comparison.frame
        self.assertEqual([c for c in frame.columns if c.startswith('rel_')], [
            'rel_asymptotic_fem', 'rel_network_fem', 'rel_quadratic_fem',
            'rel_network_asymptotic', 'rel_quadratic_asymptotic', 'rel_quadratic_network',
        ])
        np.testing.assert_allclose(frame['rel_quadratic_fem'], -0.25, rtol=1e-12)
        np.testing.assert_allclose(frame['rel_network_asymptotic'], 0.0, atol=1e-15)
        np.testing.assert_allclose(frame['rel_quadratic_network'],
                                   (frame['g_quadratic'] - frame['g_network']) / frame['g_network'], rtol=1e-12)
        pairwise = comparison.summary['max_pairwise_difference']
        self.assertEqual(len(pairwise), 6)
        self.assertAlmostEqual(pairwise['quadratic/fem'], 0.25, places=12)
        self.assertEqual(comparison.summary['reference'], 'fem')
        self.assertEqual(comparison.summary['max_relative_difference']['quadratic'], pairwise['quadratic/fem'])
        self.assertEqual(set(comparison.summary['max_relative_difference']), {'asymptotic', 'network', 'quadratic'})

    def test_empty_magnitudes(self):
        with self.assertRaises(ConfigurationError):
            compare_models(0.01, (1.0, 0.0), [])


if __name__ == '__main__':
    unittest.main()
