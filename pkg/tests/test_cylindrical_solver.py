"""
Tests for the K-symmetric discretization, the symmetry deviation and the
symmetry-breaking sweep.

The full sweep is slow; set SYMBREAK_SLOW=1 to run it.
"""

import math
import os
import sys
import unittest
from unittest import mock

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.cylindrical_solver import (BREAK_COLUMNS, BREAK_THRESHOLD, BreakReport, CylDescents, SweepGrids,
                                         assemble_cyl, break_point, break_sweep, bump_start, cyl_descents,
                                         cyl_grid_for, embed, empirical_threshold, field_rows,
                                         ground_state_cyl, lowest_descent, project_vA, radialize, sample_vA,
                                         stiffness_matrix, symmetry_deviation)
from src.core.descent import SolveReport, Tolerances
from src.core.errors import MaxIterationsError, NoSignChangeError, ParameterError
from src.core.grids import CylGrid, Field1D, Field2D, RadialGrid
from src.core.nonlinearity import NonlinearitySpec
from src.core.problem import ProblemParams, sphere_area
from src.core.radial_solver import assemble_radial, gaussian_profile, solve_radial
from src.core.testfn import BumpSpec, endpoint_ubar, eval_vA, gauss_rule, shrunk_sector

SLOW = os.environ.get("SYMBREAK_SLOW") == "1"


def _pure(N=4, alpha=3.0, A=1.0, p=4.0):
    return ProblemParams(N, alpha, A, NonlinearitySpec.pure_power(p))


class TestCylOperator(unittest.TestCase):
    """Assembly, symmetry of the splitting and the gradient."""

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_stiffness_is_symmetric_positive(self):
        grid = CylGrid.graded(4, 2, 1e-2, 3.0, 12, "geometric")
        S = stiffness_matrix(grid)
        self.assertEqual(S.shape, (144, 144))
        self.assertAlmostEqual(abs(S - S.T).max(), 0.0, places=14)
        u = self.rng.random(144)
        self.assertGreater(float(u @ (S @ u)), 0.0)

    def test_transposed_splitting_has_same_energy(self):
        """Swapping R^K and R^(N-K) relabels the same problem."""
        params = _pure(N=5)
        grid = CylGrid.graded(5, 2, 1e-2, 4.0, 15, "geometric")
        op = assemble_cyl(params, grid)
        op_t = assemble_cyl(params, grid.transposed())
        for _ in range(5):
            u = op.field(0.5 + self.rng.random(grid.shape))
            u_t = u.transposed()
            self.assertAlmostEqual(op_t.norm2(u_t) / op.norm2(u), 1.0, places=10)
            self.assertAlmostEqual(op_t.energy(u_t) - op.energy(u), 0.0,
                                   delta=1e-10 * abs(op.norm2(u)))

    def test_embedded_profile_matches_radial_form(self):
        """||embed v||_A^2 and int F(embed v) agree with the 1D values."""
        params = _pure()
        rgrid = RadialGrid.graded(4, 1e-3, 6.0, 3000, "uniform")
        rop = assemble_radial(params, rgrid)
        profile = gaussian_profile(rgrid, 1.0)

        grid = CylGrid.graded(4, 2, 1e-3, 6.0, 200, "uniform")
        op = assemble_cyl(params, grid)
        u = embed(profile, grid)

        self.assertLess(abs(op.norm2(u) / rop.norm2(profile) - 1.0), 2e-2)
        F_2d = op.functional.integral_F(u.values.ravel())
        F_1d = rop.functional.integral_F(profile.values)
        self.assertLess(abs(F_2d / F_1d - 1.0), 2e-2)

    def test_gradient_against_finite_differences(self):
        params = _pure()
        grid = CylGrid.graded(4, 2, 1e-2, 4.0, 15, "geometric")
        op = assemble_cyl(params, grid)
        eps = 1e-6
        for _ in range(100):
            u = op.field(0.5 + self.rng.random(grid.shape))
            v = op.field(self.rng.uniform(-1.0, 1.0, grid.shape))
            analytic = op.functional.inner(op.gradient(u).values.ravel(), v.values.ravel())
            plus = op.energy(op.field(u.values + eps * v.values))
            minus = op.energy(op.field(u.values - eps * v.values))
            numeric = (plus - minus) / (2 * eps)
            scale = max(abs(analytic), 1e-3 * op.norm2(u))
            self.assertLess(abs(analytic - numeric) / scale, 1e-5)

    def test_assembly_rejects(self):
        grid = CylGrid.graded(4, 2, 1e-2, 4.0, 10)
        with self.assertRaises(ParameterError):
            assemble_cyl(_pure(N=5), grid)
        tiny = CylGrid.graded(4, 2, 1e-100, 1.0, 10)
        with self.assertRaises(ParameterError):
            assemble_cyl(ProblemParams(4, 5.0, 1e300, NonlinearitySpec.pure_power(4)), tiny)
        with self.assertRaises(ParameterError):
            CylGrid.graded(4, 3, 1e-2, 4.0, 10)

    def test_field_shape_check(self):
        grid = CylGrid.graded(4, 2, 1e-2, 4.0, 10)
        with self.assertRaises(ParameterError):
            Field2D(np.ones((10, 11)), grid)


class TestSymmetryDeviation(unittest.TestCase):
    """Radial averaging and distance from radial fields."""

    def setUp(self):
        self.params = _pure()
        self.grid = CylGrid.graded(4, 2, 1e-3, 5.0, 240, "uniform")
        self.op = assemble_cyl(self.params, self.grid)

    def test_radialize_constant(self):
        u = Field2D(np.ones(self.grid.shape), self.grid)
        profile = radialize(u)
        inner = profile.grid.free_nodes <= 2.5
        np.testing.assert_allclose(profile.values[inner], 1.0, rtol=1e-12)

    def test_embedded_radial_field_is_radial(self):
        rgrid = RadialGrid.graded(4, 1e-3, 5.0, 2000, "uniform")
        u = embed(gaussian_profile(rgrid, 1.0), self.grid)
        self.assertLess(symmetry_deviation(self.op, u), 2e-2)

    def test_localized_bump_is_not_radial(self):
        grid = CylGrid.graded(4, 2, 1e-3, 1.5, 150, "uniform")
        op = assemble_cyl(self.params.with_coupling(16.0), grid)
        v = sample_vA(BumpSpec(), 16.0, grid)
        self.assertGreater(float(v.values.max()), 0.0)
        self.assertGreater(symmetry_deviation(op, v), 0.5)

    def test_zero_field_rejected(self):
        with self.assertRaises(ParameterError):
            symmetry_deviation(self.op, Field2D(np.zeros(self.grid.shape), self.grid))

    def test_embed_vanishes_outside_profile(self):
        rgrid = RadialGrid.graded(4, 1e-3, 2.0, 100, "uniform")
        u = embed(gaussian_profile(rgrid, 1.0), self.grid)
        S, T = self.grid.mesh()
        self.assertTrue(np.all(u.values[np.hypot(S, T) >= 2.0] == 0.0))

    def test_field_rows(self):
        grid = CylGrid.graded(4, 2, 1e-2, 1.0, 4)
        rows = field_rows(Field2D(np.arange(16.0).reshape(4, 4), grid))
        self.assertEqual(len(rows), 16)
        self.assertEqual(set(rows[0]), {"s", "t", "u"})
        self.assertEqual(rows[1]["u"], 1.0)


class TestCylDescent(unittest.TestCase):
    """Nehari descent in the K-symmetric class."""

    def test_descent_lowers_projected_energy(self):
        params = _pure(p=5.0)
        grid = CylGrid.graded(4, 2, 1e-3, 20.0, 30, "geometric")
        op = assemble_cyl(params, grid)
        S, T = grid.mesh()
        init = Field2D(np.exp(-(S ** 2 + T ** 2)), grid)
        start = op.energy(init.scaled(op.nehari_project(init)))
        try:
            u, report = ground_state_cyl(op, init, Tolerances(residual=1e-4, max_iter=200), "gaussian")
            self.assertIsNotNone(report.deviation)
        except MaxIterationsError as exc:
            u, report = exc.field, exc.report
        self.assertIsInstance(u, Field2D)
        self.assertLessEqual(report.level, start * (1 + 1e-12))
        self.assertGreaterEqual(report.min_value, 0.0)
        self.assertEqual(report.init, "gaussian")
        self.assertAlmostEqual(op.nehari_project(u), 1.0, delta=1e-4)

    def test_rejects_foreign_init(self):
        op = assemble_cyl(_pure(), CylGrid.graded(4, 2, 1e-2, 4.0, 10))
        other = CylGrid.graded(4, 2, 1e-2, 4.0, 12)
        with self.assertRaises(ParameterError):
            ground_state_cyl(op, Field2D(np.ones(other.shape), other))

    def test_grid_covers_dilation_radius(self):
        grids = SweepGrids(cyl_nodes=20, cyl_r_max=5.0)
        grid = cyl_grid_for(_pure(), 2, grids, extent=3.0)
        self.assertAlmostEqual(grid.s_nodes[-1], 12.0)
        self.assertEqual(grid.shape, (20, 20))

    def test_lowest_descent(self):
        low = SolveReport(1.0, 1, 0.0, 1.0, 0.0, True, "radial")
        high = SolveReport(2.0, 1, 0.0, 1.0, 0.0, True, "test_function")
        self.assertIsNone(lowest_descent([]))
        self.assertEqual(lowest_descent([("b", None, high), ("a", None, low)])[0], "a")


class TestBreakSweep(unittest.TestCase):
    """Per-point verdicts and the empirical threshold."""

    def _report(self, A, broken):
        return BreakReport(A, 2, 1.0, 0.5 if broken else 1.0, 0.3 if broken else 0.0,
                           broken, 0.5 if broken else 0.0)

    def test_row_columns(self):
        row = self._report(10.0, True).as_row()
        self.assertEqual(list(row), BREAK_COLUMNS)
        self.assertEqual(row["threshold"], BREAK_THRESHOLD)
        self.assertEqual(row["error"], "")

    def test_empirical_threshold(self):
        reports = [self._report(1.0, False), self._report(10.0, True), self._report(100.0, True)]
        self.assertEqual(empirical_threshold(reports), 10.0)
        self.assertEqual(empirical_threshold(reports[:1]), math.inf)
        self.assertEqual(empirical_threshold([]), math.inf)

    def test_failed_point_is_recorded(self):
        params = ProblemParams(4, 3.0, 1.0, NonlinearitySpec.double_power_min(8))
        grids = SweepGrids(radial_nodes=50, cyl_nodes=10)
        reports = break_sweep(params, 2, [1.0, 2.0], grids, Tolerances(max_iter=0))
        self.assertEqual([r.A for r in reports], [1.0, 2.0])
        for report in reports:
            self.assertFalse(report.broken)
            self.assertTrue(report.error)
            self.assertTrue(math.isnan(report.m_A))

    def test_sweep_rejects_unsorted(self):
        params = ProblemParams(4, 3.0, 1.0, NonlinearitySpec.double_power_min(8))
        with self.assertRaises(ParameterError):
            break_sweep(params, 2, [10.0, 1.0])
        with self.assertRaises(ParameterError):
            break_sweep(params, 2, [0.0, 1.0])

    def test_break_point_defaults(self):
        params = ProblemParams(4, 3.0, 1.0, NonlinearitySpec.double_power_min(8))
        report = break_point(params, 2, SweepGrids(radial_nodes=30, cyl_nodes=8), Tolerances(max_iter=0))
        self.assertEqual(report.K, 2)
        self.assertEqual(report.threshold, BREAK_THRESHOLD)


    def test_failed_report_keeps_radial_level(self):
        report = BreakReport.failed(3.0, 2, 0.2, "boom", m_A=1.5)
        self.assertEqual(report.m_A, 1.5)
        self.assertTrue(math.isnan(report.m_A_grid))
        self.assertIsNone(report.fields)
        self.assertEqual(report.as_row()["error"], "boom")


class TestProjectedStart(unittest.TestCase):
    """Dual-cell projection of v_A and the dilated bump start."""

    def _mass(self, A, K=2, N=4, lam=1.0):
        rho_lo, rho_hi, th_lo, th_hi = shrunk_sector(A)
        rho, w_rho = gauss_rule(lam * rho_lo, lam * rho_hi)
        theta, w_th = gauss_rule(th_lo, th_hi)
        R, TH = np.meshgrid(rho, theta, indexing="ij")
        S, T = R * np.cos(TH), R * np.sin(TH)
        v = eval_vA(BumpSpec(), A, K, N, S / lam, T / lam)
        density = v * S ** (K - 1) * T ** (N - K - 1) * R
        return sphere_area(K) * sphere_area(N - K) * float(w_rho @ density @ w_th)

    def test_narrow_sector_is_not_lost(self):
        grid = CylGrid.graded(4, 2, 1e-3, 4.0, 24, "geometric")
        u = project_vA(BumpSpec(), 1000.0, grid)
        self.assertGreater(float(u.values.max()), 0.0)
        self.assertGreaterEqual(float(u.values.min()), 0.0)

    def test_mass_is_conserved(self):
        for A, n in ((16.0, 40), (1000.0, 24)):
            grid = CylGrid.graded(4, 2, 1e-3, 4.0, n, "geometric")
            u = project_vA(BumpSpec(), A, grid)
            mass = float(np.sum(grid.measure_weights() * u.values))
            self.assertAlmostEqual(mass / self._mass(A), 1.0, delta=1e-3)

    def test_dilation_scales_mass(self):
        grid = CylGrid.graded(4, 2, 1e-3, 8.0, 60, "geometric")
        u1 = project_vA(BumpSpec(), 16.0, grid)
        u2 = project_vA(BumpSpec(), 16.0, grid, lam=2.0)
        w = grid.measure_weights()
        self.assertAlmostEqual(float(np.sum(w * u2.values)) / float(np.sum(w * u1.values)), 16.0,
                               delta=16.0 * 1e-3)

    def test_bump_start_dilates_until_admissible(self):
        params = ProblemParams(4, 3.0, 1000.0, NonlinearitySpec.double_power_min(8))
        grid = CylGrid.graded(4, 2, 1e-3, 1000.0, 40, "geometric")
        op = assemble_cyl(params, grid)
        spec = BumpSpec.for_nonlinearity(params.nonlinearity)
        self.assertFalse(op.functional.meets_nehari(project_vA(spec, 1000.0, grid).values.ravel()))
        u = bump_start(op, spec, 1.0)
        self.assertTrue(op.functional.meets_nehari(u.values.ravel()))
        self.assertGreater(op.nehari_project(u), 0.0)

    def test_bump_start_gives_up_on_small_grid(self):
        params = ProblemParams(4, 3.0, 1000.0, NonlinearitySpec.double_power_min(8))
        op = assemble_cyl(params, CylGrid.graded(4, 2, 1e-3, 2.0, 20, "geometric"))
        with self.assertRaises(NoSignChangeError):
            bump_start(op, BumpSpec.for_nonlinearity(params.nonlinearity), 1.0)

    def test_superlinear_start_is_undilated(self):
        grid = CylGrid.graded(4, 2, 1e-3, 4.0, 30, "geometric")
        op = assemble_cyl(_pure(A=16.0, p=5.0), grid)
        u = bump_start(op, BumpSpec(), 1.0)
        np.testing.assert_allclose(u.values, project_vA(BumpSpec(), 16.0, grid).values)


class TestCylDescents(unittest.TestCase):
    """Descents from both starts on one grid and the same-grid radial level."""

    TOL = Tolerances(residual=1e-4, max_iter=2000, log_every=0)

    def _report(self, level, deviation):
        return SolveReport(level, 1, 0.0, 1.0, 0.0, True, "x", deviation)

    def test_radial_reference_prefers_radial_run(self):
        runs = [("test_function", None, self._report(0.5, 0.6)), ("radial", None, self._report(1.0, 0.01))]
        descents = CylDescents(None, runs, 1.2, [])
        self.assertEqual(descents.radial_reference(), 1.0)
        self.assertEqual(descents.lowest()[0], "test_function")

    def test_radial_reference_falls_back_to_embedding(self):
        runs = [("radial", None, self._report(0.4, 0.7))]
        self.assertEqual(CylDescents(None, runs, 1.2, []).radial_reference(), 1.2)
        self.assertEqual(CylDescents(None, [], 1.2, ["radial: failed"]).radial_reference(), 1.2)
        self.assertIsNone(CylDescents(None, [], 1.2, []).lowest())

    def test_radial_start_does_not_raise_level(self):
        params = _pure(p=5.0)
        radial_u, _ = solve_radial(params, n=200, r_max=40.0, tol=self.TOL)
        grids = SweepGrids(cyl_nodes=24)
        descents = cyl_descents(params, 2, radial_u, grids, self.TOL)
        self.assertTrue(math.isfinite(descents.embedded_level))
        try:
            _, report = ground_state_cyl(descents.op, embed(radial_u, descents.op.grid), self.TOL, "radial")
        except MaxIterationsError as exc:
            report = exc.report
        self.assertLessEqual(report.level, descents.embedded_level * (1 + 1e-12))
        self.assertLessEqual(descents.radial_reference(), descents.embedded_level)


class TestBreakPoint(unittest.TestCase):
    """One sweep point end to end on small grids."""

    TOL = Tolerances(residual=1e-3, max_iter=2000, log_every=0)
    GRIDS = SweepGrids(radial_nodes=200, cyl_nodes=24)

    def test_parameter_error_is_recorded(self):
        params = _pure(p=5.0)
        with mock.patch("src.core.cylindrical_solver.cyl_descents",
                        side_effect=ParameterError("zero start")):
            report = break_point(params, 2, self.GRIDS, self.TOL)
        self.assertEqual(report.error, "zero start")
        self.assertFalse(report.broken)

    def test_all_starts_failing_is_recorded(self):
        params = _pure(p=5.0)
        empty = CylDescents(None, [], 1.0, ["radial: stalled", "test_function: stalled"])
        with mock.patch("src.core.cylindrical_solver.cyl_descents", return_value=empty):
            report = break_point(params, 2, self.GRIDS, self.TOL)
        self.assertIn("radial: stalled", report.error)
        self.assertGreater(report.m_A, 0.0)
        self.assertTrue(math.isnan(report.c_AK))

    def test_point_keeps_fields(self):
        report = break_point(_pure(p=5.0), 2, self.GRIDS, self.TOL, keep_fields=True)
        self.assertEqual(report.error, "")
        radial_u, u = report.fields
        self.assertIsInstance(radial_u, Field1D)
        self.assertIsInstance(u, Field2D)
        self.assertTrue(math.isfinite(report.m_A_grid))
        self.assertLessEqual(report.c_AK, report.m_A_grid * (1 + 1e-12))
        self.assertAlmostEqual(report.margin, report.m_A_grid - report.c_AK)
        self.assertEqual(report.broken, report.c_AK < report.m_A_grid and report.deviation > report.threshold)

    def test_fields_dropped_by_default(self):
        report = break_point(_pure(p=5.0), 2, self.GRIDS, self.TOL)
        self.assertIsNone(report.fields)


@unittest.skipUnless(SLOW, "set SYMBREAK_SLOW=1 for the full sweep")
class TestSweepVerdicts(unittest.TestCase):
    """Default grids and the default nonlinearity at N=4, alpha=3, K=2."""

    A_VALUES = [10.0, 30.0, 100.0, 300.0]
    TOL = Tolerances(residual=1e-5, max_iter=5000, log_every=0)

    @classmethod
    def setUpClass(cls):
        cls.params = ProblemParams(4, 3.0, 1.0, NonlinearitySpec.double_power_min(8, p1=3))
        cls.reports = break_sweep(cls.params, 2, cls.A_VALUES, SweepGrids(), cls.TOL, workers=2)

    def test_every_point_solves(self):
        self.assertEqual([r.A for r in self.reports], self.A_VALUES)
        for report in self.reports:
            self.assertEqual(report.error, "", f"A={report.A}")
            self.assertGreater(report.m_A, 0.0)
            self.assertLessEqual(report.c_AK, report.m_A_grid * (1 + 1e-12))

    def test_small_coupling_stays_radial(self):
        first = self.reports[0]
        self.assertFalse(first.broken)
        self.assertLess(first.deviation, 0.05)

    def test_large_coupling_breaks(self):
        broken = [r for r in self.reports if r.broken]
        self.assertTrue(broken)
        self.assertTrue(self.reports[-1].broken)
        for report in broken:
            self.assertGreater(report.deviation, 0.1)
            self.assertGreater(report.margin, 0.0)
        self.assertIn(empirical_threshold(self.reports), self.A_VALUES[1:])

    def test_endpoint_bound_dominates_level(self):
        spec = BumpSpec.for_nonlinearity(self.params.nonlinearity)
        checked = 0
        for report in self.reports:
            try:
                estimate = endpoint_ubar(spec, report.A, 2, 4, 3.0, self.params.nonlinearity)
            except ParameterError:
                continue
            self.assertGreaterEqual(estimate.bound * (1 + 1e-2), report.c_AK, f"A={report.A}")
            checked += 1
        self.assertGreater(checked, 0)

    def test_rerun_from_output_is_fixed_point(self):
        params = self.params.with_coupling(100.0)
        grids = SweepGrids()
        radial_u, _ = solve_radial(params, grids.radial_nodes, grids.radial_r_min, grids.radial_r_max,
                                   1.0, self.TOL)
        descents = cyl_descents(params, 2, radial_u, grids, self.TOL)
        _, u, report = descents.lowest()
        again, rerun = ground_state_cyl(descents.op, u, self.TOL, "rerun")
        self.assertLessEqual(rerun.iterations, 5)
        self.assertAlmostEqual(rerun.level / report.level, 1.0, delta=1e-8)
        self.assertAlmostEqual(rerun.deviation, report.deviation, delta=1e-4)

    def test_grid_refinement_moves_level_little(self):
        params = self.params.with_coupling(30.0)
        coarse = break_point(params, 2, SweepGrids(cyl_nodes=256), self.TOL)
        fine = break_point(params, 2, SweepGrids(cyl_nodes=384), self.TOL)
        self.assertEqual((coarse.error, fine.error), ("", ""))
        self.assertLess(abs(fine.c_AK / coarse.c_AK - 1.0), 1e-2)
        self.assertEqual(fine.broken, coarse.broken)


if __name__ == '__main__':
    unittest.main()
