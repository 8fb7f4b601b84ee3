#!/usr/bin/env python3
"""
Tests for the dense-limit asymptotics: network model, transcendental relation,
canonical cusp problem and geodesic tail.
"""

import math
import tempfile
import unittest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pandas as pd
from hypothesis import given, strategies as st

from src.dense import (
    CanonicalProblem, DTable, NetworkParams, SmallFLaw, canonical_field, default_f0_grid, dispersion_determinant,
    geodesic_distance, geodesic_rate, network_f, network_g, network_kappa, on_axis_cosh,
    small_f_dtable_law, tabulate_D, transcendental_ftable, transcendental_solve,
)
from src.eigen import FTable, TiltVector, assemble_operators, principal_eigenvalue, sector_angles
from src.geometry import ASTROID_AREA, AstroidSpec, CellSpec, build_cell_mesh
from src.transforms import hessian_kappa, keller_kappa_eps, quadratic_g
from src.utils import ConfigurationError, EnvLoader, TableRangeError

SLOW = EnvLoader().flag('slow_tests')
PARAMS = NetworkParams(0.01)

components = st.floats(-1.0, 1.0)


def synthetic_dtable(n: int = 60) -> DTable:
    f0 = np.geomspace(1e-3, 30.0, n)
    d = 1.0 / (math.pi * ASTROID_AREA * f0)
    return DTable(pd.DataFrame({'f0': f0, 'D1': d, 'D2': d, 'D3': d}), {'law': 'synthetic'})


class TestNetworkModel(unittest.TestCase):
    def test_parameters(self):
        self.assertAlmostEqual(PARAMS.alpha, 0.0253975, delta=1e-6)
        self.assertAlmostEqual(PARAMS.beta, 26.545, delta=0.01)
        self.assertEqual(NetworkParams.from_spec(CellSpec.from_epsilon(0.01)).epsilon, PARAMS.epsilon)
        for epsilon in (0.0, math.pi):
            with self.assertRaises(ConfigurationError):
                NetworkParams(epsilon)

    def test_values(self):
        self.assertAlmostEqual(network_f((1.0, 0.0), PARAMS), 1.5993, delta=1e-3)
        self.assertEqual(network_f(TiltVector(), PARAMS), 0.0)
        self.assertEqual(network_g((0.0, 0.0), PARAMS), 0.0)

    def test_small_tilt_matches_keller(self):
        kappa = keller_kappa_eps(0.01)
        for tilt in (TiltVector(0.02, 0.0), TiltVector(0.01, 0.015)):
            self.assertAlmostEqual(network_f(tilt, PARAMS) / (kappa * tilt.norm_sq), 1.0, delta=0.01)
        self.assertAlmostEqual(network_kappa(PARAMS), kappa, places=14)

    @given(p=components, q=components)
    def test_separable(self, p, q):
        combined = network_f((p, q), PARAMS)
        self.assertAlmostEqual(combined, network_f((p, 0.0), PARAMS) + network_f((0.0, q), PARAMS),
                               delta=1e-12 * max(1.0, combined))

    @given(p=components, q=components)
    def test_conjugate_pair(self, p, q):
        tilt = np.array([p, q])
        gradient = 4.0 * PARAMS.alpha / PARAMS.area * math.pi * np.sinh(2.0 * math.pi * tilt)
        expected = float(tilt @ gradient) - network_f(tilt, PARAMS)
        self.assertAlmostEqual(network_g(gradient, PARAMS), expected, delta=1e-9 * max(1.0, abs(expected)))
        other = np.array([0.3, -0.1])
        self.assertGreaterEqual(network_g(other, PARAMS) + 1e-12, float(tilt @ other) - network_f(tilt, PARAMS))

    def test_network_below_quadratic(self):
        kappa = keller_kappa_eps(0.01)
        for magnitude in (1.0, 2.0, 4.0):
            xi = magnitude * np.array([1.0, 1.0]) / math.sqrt(2.0)
            self.assertLess(network_g(xi, PARAMS), quadratic_g(kappa, xi))


class TestTranscendentalRelation(unittest.TestCase):
    @given(p=components, q=components, d=st.floats(0.01, 10.0))
    def test_equal_d_factorisation(self, p, q, d):
        tilt = TiltVector(p, q)
        gamma = 1.0 / (2.0 * math.pi * PARAMS.alpha)
        c_sum = math.cosh(2.0 * math.pi * p) + math.cosh(2.0 * math.pi * q) - 2.0
        expected = gamma * (gamma - d * c_sum)
        value = dispersion_determinant(tilt, d, d, d, PARAMS.alpha)
        self.assertAlmostEqual(value, expected, delta=1e-9 * max(1.0, abs(expected), d * d * c_sum ** 2))

    def test_small_f_law_recovers_network(self):
        law = SmallFLaw()
        for tilt in (TiltVector(0.3, 0.0), TiltVector(0.5, 0.2), TiltVector(-0.1, 0.8)):
            result = transcendental_solve(tilt, law, PARAMS)
            expected = network_f(tilt, PARAMS)
            self.assertAlmostEqual(result.f / expected, 1.0, delta=1e-10)
            self.assertLessEqual(result.bracket[0], result.f)
            self.assertGreaterEqual(result.bracket[1], result.f)

    def test_small_f_law_values(self):
        d1, d2, d3 = small_f_dtable_law(0.5)
        self.assertEqual(d1, d2)
        self.assertAlmostEqual(d3 * math.pi * ASTROID_AREA * 0.5, 1.0, places=14)

    def test_on_axis_form(self):
        law = SmallFLaw()
        result = transcendental_solve(TiltVector(0.3, 0.0), law, PARAMS)
        self.assertAlmostEqual(on_axis_cosh(result.f, law, PARAMS) / math.cosh(0.6 * math.pi), 1.0, delta=1e-9)

    def test_origin(self):
        result = transcendental_solve(TiltVector(), SmallFLaw(), PARAMS)
        self.assertEqual(result.f, 0.0)

    def test_tabulated_provider(self):
        table = synthetic_dtable()
        tilt = TiltVector(0.5, 0.2)
        result = transcendental_solve(tilt, table, PARAMS)
        self.assertAlmostEqual(result.f / network_f(tilt, PARAMS), 1.0, delta=1e-3)
        self.assertLess(abs(result.residual), 1e-6)

    def test_root_below_table_range(self):
        with self.assertRaises(TableRangeError):
            transcendental_solve(TiltVector(0.01, 0.0), synthetic_dtable(), PARAMS)

    def test_ftable(self):
        angles = [0.0, math.pi / 4.0]
        ftable = transcendental_ftable(SmallFLaw(), PARAMS, angles, [0.2, 0.5])
        self.assertEqual(len(ftable), 5)
        self.assertEqual(ftable.n_failed, 0)
        self.assertEqual(ftable.frame['f'].iloc[0], 0.0)
        np.testing.assert_allclose(ftable.values()[1:], network_f(ftable.points()[1:], PARAMS), rtol=1e-9)
        self.assertEqual(ftable.metadata['model'], 'dense_asymptotic')

    def test_ftable_records_failures(self):
        ftable = transcendental_ftable(synthetic_dtable(), PARAMS, [0.0], [0.01, 0.5])
        self.assertEqual(ftable.n_failed, 1)
        self.assertEqual(list(ftable.frame['status']), ['ok', 'failed', 'ok'])
        with self.assertRaises(TableRangeError):
            transcendental_ftable(synthetic_dtable(), PARAMS, [0.0], [0.01], continue_on_error=False)

    def test_parallel_rays_match_serial(self):
        angles = [0.0, math.pi / 8.0, math.pi / 4.0]
        serial = transcendental_ftable(SmallFLaw(), PARAMS, angles, [0.3, 0.6])
        parallel = transcendental_ftable(SmallFLaw(), PARAMS, angles, [0.3, 0.6], max_workers=3)
        np.testing.assert_allclose(parallel.values(), serial.values(), rtol=1e-10)

    def test_parallel_chunks_keep_ray_continuation(self):
        angles = [k * math.pi / 16.0 for k in range(4)]
        table = synthetic_dtable()
        serial = transcendental_ftable(table, PARAMS, angles, [0.3, 0.6]).frame
        chunked = transcendental_ftable(table, PARAMS, angles, [0.3, 0.6], max_workers=2).frame
        # origin, then two nodes per ray; the first chunk holds rays 0 and 1
        first_chunk = slice(1, 5)
        np.testing.assert_array_equal(chunked['f'].iloc[first_chunk], serial['f'].iloc[first_chunk])
        np.testing.assert_array_equal(chunked['iterations'].iloc[first_chunk],
                                      serial['iterations'].iloc[first_chunk])
        np.testing.assert_allclose(chunked['f'], serial['f'], rtol=1e-10)


class TestGeodesic(unittest.TestCase):
    def test_cases(self):
        self.assertAlmostEqual(geodesic_distance((1.0, 0.0)), 1.0, places=14)
        self.assertAlmostEqual(geodesic_distance((1.0, 1.0)), math.pi / 2.0, places=14)
        self.assertAlmostEqual(geodesic_rate((1.0, 1.0)), math.pi ** 2 / 16.0, places=14)
        self.assertEqual(geodesic_distance((0.0, 0.0)), 0.0)

    @given(x=st.floats(-5.0, 5.0), y=st.floats(-5.0, 5.0))
    def test_lattice_symmetry(self, x, y):
        reference = geodesic_distance((x, y))
        for image in ((y, x), (-x, y), (x, -y), (-y, -x)):
            self.assertAlmostEqual(geodesic_distance(image), reference, delta=1e-12)
        self.assertGreaterEqual(reference, math.pi / 4.0 * math.hypot(x, y) - 1e-12)

    def test_vectorised(self):
        values = geodesic_rate(np.array([[2.0, 0.0], [0.0, -2.0]]))
        np.testing.assert_allclose(values, [1.0, 1.0])


class TestCanonicalProblem(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.spec = AstroidSpec()
        cls.problem = CanonicalProblem(cls.spec)
        cls.unit = cls.problem.solve(1.0)

    def test_mirror_symmetry(self):
        self.assertLess(self.unit.symmetry_mismatch(), 1e-6)

    def test_small_f0_law(self):
        f0 = 1e-4
        result = self.problem.solve(f0)
        for value in result.d_values:
            self.assertAlmostEqual(value * math.pi * ASTROID_AREA * f0, 1.0, delta=0.05)

    def test_small_f0_asymptote(self):
        f0 = 1e-3
        result = self.problem.solve(f0)
        for value in result.d_values[:3]:
            self.assertGreaterEqual(value * math.pi * ASTROID_AREA * f0, 0.95)
            self.assertLessEqual(value * math.pi * ASTROID_AREA * f0, 1.05)
        self.assertLess(result.symmetry_mismatch(), 1e-6)

    def test_source_offset_sign(self):
        # the far cusps stay positive; the source offset follows -sqrt(f0) once screening sets in
        self.assertGreater(self.unit.D2, self.unit.D3)
        self.assertGreater(self.unit.D3, 0.0)
        self.assertLess(self.unit.D1, 0.0)
        self.assertAlmostEqual(self.unit.D1 / -1.0, 1.0, delta=0.05)
        screened = self.problem.solve(10.0)
        self.assertAlmostEqual(screened.D1 / -math.sqrt(10.0), 1.0, delta=0.1)
        self.assertGreater(screened.D3, 0.0)

    def test_nonpositive_f0_rejected(self):
        for f0 in (0.0, -1.0):
            with self.assertRaises(ConfigurationError):
                self.problem.solve(f0)

    def test_tabulation(self):
        table = tabulate_D([10.0, 0.01, 1.0, 0.1], self.spec, problem=self.problem, max_workers=2)
        self.assertEqual(list(table.frame['f0']), [0.01, 0.1, 1.0, 10.0])
        self.assertEqual(table.monotonicity_violations(), {'D1': 0, 'D2': 0, 'D3': 0})
        self.assertEqual(table.metadata['failed_nodes'], [])
        self.assertLess(table.metadata['max_d4_d2_mismatch'], 1e-6)
        self.assertAlmostEqual(table.evaluate(1.0)[1], self.unit.D2, places=10)
        self.assertEqual(table.metadata['nonpositive_nodes'], {'D2': [], 'D3': []})
        self.assertGreater(table.metadata['d1_zero_crossing'], 0.01)
        self.assertLess(table.metadata['d1_zero_crossing'], 0.1)

    def test_single_node_table(self):
        table = tabulate_D([1.0], self.spec, problem=self.problem)
        self.assertEqual(table.f_bounds, (1.0, 1.0))
        np.testing.assert_allclose(table.evaluate(1.0), self.unit.d_values[:3])

    def test_field(self):
        frame = canonical_field(1.0, self.spec, problem=self.problem)
        self.assertEqual(list(frame.columns), ['x', 'y', 'psi', 'log10_abs_psi'])
        self.assertEqual(len(frame), self.problem.mesh.n_vertices)

    @unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
    def test_insensitive_to_trim_distance(self):
        halved = CanonicalProblem(AstroidSpec(trim_distance=0.005)).solve(1.0)
        self.assertAlmostEqual(halved.D2 / self.unit.D2, 1.0, delta=0.02)
        self.assertAlmostEqual(halved.D3 / self.unit.D3, 1.0, delta=0.02)


@unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
class TestDenseAgainstFem(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dtable = tabulate_D(default_f0_grid(60, 1e-4, 30.0), AstroidSpec(), max_workers=4)

    def test_matches_fem_at_small_gap(self):
        params = NetworkParams(0.001)
        system = assemble_operators(build_cell_mesh(CellSpec.from_epsilon(0.001), 0.15))
        for tilt in (TiltVector(0.3, 0.0), TiltVector(1.0, 0.0), TiltVector(0.7, 0.7),
                     TiltVector(1.5, 0.0), TiltVector(1.1, 1.1)):
            dense = transcendental_solve(tilt, self.dtable, params).f
            fem = principal_eigenvalue(system, tilt).f
            self.assertAlmostEqual(dense / fem, 1.0, delta=0.02, msg=f"p=({tilt.p}, {tilt.q})")

    def test_curvature_recovers_keller(self):
        # same nodes for both tables so the quartic part of the fit cancels
        radii = [0.08, 0.1, 0.12, 0.14, 0.16]
        deviation = {}
        for eps in (0.001, 0.01):
            params = NetworkParams(eps)
            dense = transcendental_ftable(self.dtable, params, sector_angles(5, 'quadrant'), radii)
            self.assertEqual(dense.metadata['n_failed'], 0)
            network = FTable.from_function(lambda t: network_f(t, params), dense.tilts())
            ratio = hessian_kappa(dense, radius=0.17) / hessian_kappa(network, radius=0.17)
            deviation[eps] = ratio * network_kappa(params) / keller_kappa_eps(eps) - 1.0
        self.assertLessEqual(abs(deviation[0.001]), 0.03)
        self.assertGreater(deviation[0.01], deviation[0.001])
        self.assertLess(deviation[0.01], 0.12)


class TestDTable(unittest.TestCase):
    def test_range(self):
        table = synthetic_dtable()
        with self.assertRaises(TableRangeError):
            table.evaluate(40.0)
        with self.assertRaises(TableRangeError):
            table.evaluate(1e-4)
        exact = 1.0 / (math.pi * ASTROID_AREA * 0.05)
        self.assertAlmostEqual(table.evaluate(0.05)[0] / exact, 1.0, delta=1e-3)

    def test_sign_audits(self):
        table = DTable(pd.DataFrame({'f0': [0.01, 0.1, 1.0], 'D1': [1.0, -1.0, -2.0],
                                     'D2': [1.0, 0.5, 0.0], 'D3': [1.0, 0.5, -1e-3]}))
        self.assertAlmostEqual(table.d1_zero_crossing(), math.sqrt(1e-3), places=12)
        self.assertEqual(table.nonpositive_nodes(), {'D2': [1.0], 'D3': [1.0]})
        self.assertIsNone(synthetic_dtable().d1_zero_crossing())
        self.assertEqual(synthetic_dtable().nonpositive_nodes(), {'D2': [], 'D3': []})

    def test_rejects_bad_nodes(self):
        with self.assertRaises(ConfigurationError):
            DTable(pd.DataFrame({'f0': [1.0, 1.0], 'D1': [1.0, 1.0], 'D2': [1.0, 1.0], 'D3': [1.0, 1.0]}))
        with self.assertRaises(ConfigurationError):
            DTable(pd.DataFrame({'f0': [-1.0], 'D1': [1.0], 'D2': [1.0], 'D3': [1.0]}))

    def test_csv_round_trip(self):
        table = synthetic_dtable(10)
        with tempfile.TemporaryDirectory() as tmp:
            loaded = DTable.read_csv(table.to_csv(str(Path(tmp) / 'dtable.csv')))
        np.testing.assert_allclose(loaded.frame.to_numpy(), table.frame.to_numpy(), rtol=1e-11)
        self.assertEqual(loaded.metadata, {'law': 'synthetic'})


if __name__ == '__main__':
    unittest.main()
