#!/usr/bin/env python3
"""
Tests for FEM assembly, the shift-and-invert eigensolver and p-sweeps.
"""

import math
import tempfile
import unittest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
from hypothesis import given, settings, strategies as st

from src.eigen import (
    FTable, SolverOptions, TiltVector, assemble, assemble_operators, assemble_tilted, complete_symmetry,
    convergence_study, effective_diffusivity_fem, polar_p_grid, principal_eigenvalue,
    principal_eigenvalue_tilted, radial_monotonicity_violations, square_p_grid, sweep_f, symmetry_defect,
)
from src.geometry import CellSpec, CellVariant, build_cell_mesh
from src.utils import ConfigurationError, ConvergenceError, EnvLoader, TableRangeError

SLOW = EnvLoader().flag('slow_tests')


class TestAssembly(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.spec = CellSpec(math.pi / 2)
        cls.mesh = build_cell_mesh(cls.spec, 0.3)
        cls.system = assemble_operators(cls.mesh)

    def test_constants_in_stiffness_kernel(self):
        ones = np.ones(self.system.n_dofs)
        self.assertLess(np.max(np.abs(self.system.stiffness @ ones)), 1e-10)

    def test_drift_exactly_skew(self):
        for drift in (self.system.drift_x, self.system.drift_y):
            self.assertEqual((drift + drift.T).count_nonzero(), 0)
        drift = self.system.drift(TiltVector(0.7, -0.2))
        self.assertAlmostEqual(float(np.sum(drift @ np.ones(self.system.n_dofs))), 0.0, places=10)

    def test_zero_tilt_has_no_drift(self):
        self.assertEqual(assemble(self.mesh, TiltVector()).skew_drift.count_nonzero(), 0)

    def test_mass_total_is_area(self):
        self.assertAlmostEqual(self.system.area(), self.mesh.area(), places=9)
        self.assertAlmostEqual(self.system.area() / self.spec.fluid_area(), 1.0, delta=0.01)
        np.testing.assert_allclose(self.system.mass.toarray(), self.system.mass.toarray().T, atol=1e-14)

    def test_periodic_identification(self):
        dof_map = self.system.dof_map
        pairs = self.mesh.periodic_pairing
        np.testing.assert_array_equal(dof_map.vertex_dof[pairs[:, 0]], dof_map.vertex_dof[pairs[:, 1]])
        self.assertEqual(self.system.n_dofs, self.mesh.n_vertices - len(pairs) + 1)


class TestPrincipalEigenvalue(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.mesh = build_cell_mesh(CellSpec(math.pi / 2), 0.25)
        cls.system = assemble_operators(cls.mesh)

    def test_zero_tilt(self):
        result = principal_eigenvalue(self.system, TiltVector())
        self.assertLess(abs(result.f), 1e-10)
        self.assertTrue(result.is_single_signed())

    def test_obstacle_free_cell(self):
        system = assemble_operators(build_cell_mesh(CellSpec(0.0), 0.4))
        for tilt in (TiltVector(1.0, 0.0), TiltVector(0.3, -0.8)):
            result = principal_eigenvalue(system, tilt)
            self.assertAlmostEqual(result.f, tilt.norm_sq, delta=1e-8 * tilt.norm_sq)

    def test_dilute_cell(self):
        spec = CellSpec(0.01)
        system = assemble_operators(build_cell_mesh(spec, 0.2))
        result = principal_eigenvalue(system, TiltVector(1.0, 0.0))
        self.assertAlmostEqual(result.f, 1.0 - spec.sigma, delta=1e-3)
        self.assertLessEqual(result.f, 1.0 + 10 * 0.2 ** 2)

    def test_result_contract(self):
        options = SolverOptions()
        result = principal_eigenvalue(self.system, TiltVector(1.5, 0.5), options=options)
        self.assertLessEqual(result.residual, options.tolerance)
        self.assertTrue(result.is_single_signed())
        mass_norm = result.eigenvector @ (self.system.mass @ result.eigenvector)
        self.assertAlmostEqual(mass_norm, 1.0, places=10)
        self.assertGreater(np.sum(self.system.mass @ result.eigenvector), 0.0)
        self.assertGreater(result.f, 0.0)
        self.assertLess(result.f, TiltVector(1.5, 0.5).norm_sq)

    @settings(max_examples=15, deadline=None)
    @given(p=st.floats(-2.0, 2.0), q=st.floats(-2.0, 2.0))
    def test_bounds(self, p, q):
        tilt = TiltVector(p, q)
        result = principal_eigenvalue(self.system, tilt)
        self.assertGreaterEqual(result.f, -1e-10)
        self.assertLessEqual(result.f, tilt.norm_sq * (1.0 + 10 * 0.25 ** 2) + 1e-10)

    def test_non_convergence_reports_residual(self):
        options = SolverOptions(tolerance=0.0, max_iterations=2, refine_shift=False)
        with self.assertRaises(ConvergenceError) as caught:
            principal_eigenvalue(self.system, TiltVector(1.0, 0.0), options=options)
        self.assertEqual(caught.exception.iterations, 2)
        self.assertTrue(np.isfinite(caught.exception.residual))

    def test_warm_start_matches_cold_start(self):
        cold = principal_eigenvalue(self.system, TiltVector(1.2, 0.4))
        previous = principal_eigenvalue(self.system, TiltVector(0.9, 0.3))
        warm = principal_eigenvalue(self.system, TiltVector(1.2, 0.4), shift_guess=previous.f + 0.1,
                                    start=previous.eigenvector, left_start=previous.left_eigenvector)
        self.assertAlmostEqual(warm.f, cold.f, delta=1e-8 * max(1.0, cold.f))

    def test_void_centred_cell_gives_same_f(self):
        tilt = TiltVector(0.8, 0.3)
        shifted = assemble_operators(build_cell_mesh(CellSpec(math.pi / 2, CellVariant.OMEGA_PRIME), 0.25))
        self.assertAlmostEqual(principal_eigenvalue(shifted, tilt).f / principal_eigenvalue(self.system, tilt).f,
                               1.0, delta=2e-2)

    def test_tilted_periodicity_cross_check(self):
        options = SolverOptions(tolerance=1e-10)
        for tilt in (TiltVector(0.5, 0.0), TiltVector(1.2, -0.7)):
            phi = principal_eigenvalue(self.system, tilt, options=options)
            psi = principal_eigenvalue_tilted(assemble_tilted(self.mesh, tilt), options=options)
            self.assertAlmostEqual(psi.f / phi.f, 1.0, delta=1e-8)

    def test_tilted_trial_functions(self):
        tilt = TiltVector(0.8, 0.3)
        system = assemble_tilted(self.mesh, tilt)
        result = principal_eigenvalue_tilted(system)
        psi = system.trial @ result.eigenvector
        pairs = self.mesh.periodic_pairing
        shifts = self.mesh.vertices[pairs[:, 1]] - self.mesh.vertices[pairs[:, 0]]
        np.testing.assert_allclose(psi[pairs[:, 1]], np.exp(-shifts @ tilt.as_array()) * psi[pairs[:, 0]],
                                   rtol=1e-10)
        self.assertTrue(result.is_single_signed())


class TestCellFamily(unittest.TestCase):
    def test_dilute_sweep(self):
        spec = CellSpec(0.01)
        grid = polar_p_grid(3, radii=[0.5, 1.0, 2.0], sector='octant')
        table = sweep_f(build_cell_mesh(spec, 0.2), grid, options=SolverOptions(tolerance=1e-10))
        self.assertEqual(table.n_failed, 0)
        self.assertTrue(table.bound_violations().empty)
        ok = table.ok_frame
        squared = (ok['p'] ** 2 + ok['q'] ** 2).to_numpy()
        nonzero = squared > 0.0
        f = ok['f'].to_numpy()[nonzero]
        squared = squared[nonzero]
        np.testing.assert_array_less(np.abs(f / ((1.0 - spec.sigma) * squared) - 1.0), 1e-2)
        # the obstacle lowers f by σ|p|² to leading order
        drop = 1.0 - f / squared
        self.assertTrue(np.all(drop >= 0.25 * spec.sigma), drop / spec.sigma)
        self.assertTrue(np.all(drop <= 2.0 * spec.sigma), drop / spec.sigma)

    @unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
    def test_bounds_across_family(self):
        h = 0.2
        grid = polar_p_grid(5, radii=[0.5, 1.0, 1.5, 2.0], sector='octant')
        for a in (0.01, math.pi / 2, math.pi - 0.01):
            table = sweep_f(build_cell_mesh(CellSpec(a), h), grid)
            self.assertEqual(table.n_failed, 0, f"a={a}")
            self.assertTrue(table.bound_violations(slack=10 * h ** 2).empty, f"a={a}")
            self.assertGreaterEqual(float(table.values().min()), -1e-10)


class TestSweep(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.mesh = build_cell_mesh(CellSpec(math.pi / 2), 0.3)
        cls.system = assemble_operators(cls.mesh)

    def test_origin_only_grid(self):
        table = sweep_f(self.mesh, [TiltVector()], system=self.system)
        self.assertEqual(len(table), 1)
        self.assertLess(abs(table.values()[0]), 1e-10)

    def test_symmetry_audit(self):
        grid = [TiltVector(0.7, 0.3), TiltVector(0.3, 0.7), TiltVector(-0.7, 0.3), TiltVector(0.7, -0.3)]
        table = sweep_f(self.mesh, grid, continuation=False, options=SolverOptions(tolerance=1e-11),
                        system=self.system)
        self.assertLess(symmetry_defect(table), 1e-6)

    def test_continuation_matches_independent_solves(self):
        grid = polar_p_grid(3, n_radial=4, p_max=2.0, sector='octant')
        warm = sweep_f(self.mesh, grid, continuation=True, system=self.system)
        cold = sweep_f(self.mesh, grid, continuation=False, system=self.system, max_workers=2)
        self.assertEqual(warm.n_failed, 0)
        np.testing.assert_allclose(warm.values(), cold.values(), rtol=1e-6, atol=1e-9)
        self.assertEqual(radial_monotonicity_violations(warm), 0)
        self.assertTrue(warm.bound_violations(slack=10 * 0.3 ** 2).empty)

    def test_failures_are_recorded(self):
        options = SolverOptions(tolerance=0.0, max_iterations=1, refine_shift=False)
        grid = [TiltVector(1.0, 0.0)]
        table = sweep_f(self.mesh, grid, options=options, system=self.system)
        self.assertEqual(table.n_failed, 1)
        self.assertEqual(table.frame.loc[0, 'status'], 'failed')
        self.assertTrue(math.isnan(table.frame.loc[0, 'f']))
        with self.assertRaises(ConvergenceError):
            sweep_f(self.mesh, grid, options=options, system=self.system, continue_on_error=False)

    def test_csv_round_trip(self):
        table = sweep_f(self.mesh, [TiltVector(), TiltVector(0.5, 0.5)], system=self.system)
        with tempfile.TemporaryDirectory() as tmp:
            path = table.to_csv(str(Path(tmp) / 'ftable.csv'), config={'a': math.pi / 2})
            loaded = FTable.read_csv(path)
            self.assertTrue((Path(tmp) / 'ftable.json').exists())
        self.assertEqual(list(loaded.frame.columns), ['p', 'q', 'f', 'residual', 'iterations', 'status', 'error'])
        np.testing.assert_allclose(loaded.values(), table.values(), rtol=1e-11)
        self.assertEqual(loaded.metadata['n_dofs'], self.system.n_dofs)


class TestFTable(unittest.TestCase):
    def test_value_lookup(self):
        table = FTable.from_function(lambda t: t.norm_sq, [TiltVector(), TiltVector(1.0, 2.0)])
        self.assertEqual(table.value_at(TiltVector(1.0, 2.0)), 5.0)
        with self.assertRaises(TableRangeError):
            table.value_at(TiltVector(0.5, 0.5))

    def test_complete_symmetry(self):
        table = FTable.from_values([TiltVector(), TiltVector(1.0, 0.5), TiltVector(1.0, 0.0)], [0.0, 1.0, 0.8])
        completed = complete_symmetry(table)
        # origin, eight images of (1, 0.5), four of (1, 0)
        self.assertEqual(len(completed), 13)
        self.assertEqual(completed.value_at(TiltVector(-0.5, -1.0)), 1.0)
        self.assertEqual(completed.value_at(TiltVector(0.0, -1.0)), 0.8)
        self.assertEqual(symmetry_defect(completed), 0.0)


class TestGrids(unittest.TestCase):
    def test_polar_grid(self):
        grid = polar_p_grid(12, n_radial=6, p_max=2.0)
        self.assertEqual(len(grid), 1 + 72)
        self.assertAlmostEqual(max(t.norm for t in grid), 2.0, places=12)

    def test_quadrant_includes_both_axes(self):
        grid = polar_p_grid(3, radii=[1.0], sector='quadrant', include_origin=False)
        self.assertAlmostEqual(grid[0].q, 0.0)
        self.assertAlmostEqual(grid[-1].p, 0.0, places=12)

    def test_square_grid(self):
        grid = square_p_grid(8, 2.0)
        self.assertEqual(len(grid), 64)
        self.assertEqual(grid[0], TiltVector())

    def test_invalid_grids(self):
        with self.assertRaises(ConfigurationError):
            polar_p_grid(0, n_radial=3)
        with self.assertRaises(ConfigurationError):
            polar_p_grid(4, n_radial=2, sector='half')


class TestEffectiveDiffusivity(unittest.TestCase):
    def test_free_diffusion(self):
        mesh = build_cell_mesh(CellSpec(0.0), 0.4)
        self.assertAlmostEqual(effective_diffusivity_fem(mesh), 1.0, delta=1e-4)

    def test_dilute_maxwell(self):
        spec = CellSpec(0.01)
        kappa = effective_diffusivity_fem(build_cell_mesh(spec, 0.2))
        self.assertAlmostEqual(kappa, 1.0 - spec.sigma, delta=1e-3)

    @unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
    def test_dense_keller(self):
        kappa = effective_diffusivity_fem(build_cell_mesh(CellSpec.from_epsilon(0.01), 0.1))
        self.assertAlmostEqual(kappa / 0.11834, 1.0, delta=0.05)

    @unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
    def test_dense_keller_small_gap(self):
        kappa = effective_diffusivity_fem(build_cell_mesh(CellSpec.from_epsilon(0.001), 0.15))
        self.assertAlmostEqual(kappa / 0.037425, 1.0, delta=0.05)

    @unittest.skipUnless(SLOW, "set OBSTACLE_LD_SLOW_TESTS=1")
    def test_second_order_convergence(self):
        study = convergence_study(CellSpec(math.pi / 2), [0.2, 0.1, 0.05], TiltVector(1.0, 1.0))
        self.assertGreaterEqual(study.observed_order, 1.7)


if __name__ == '__main__':
    unittest.main()
