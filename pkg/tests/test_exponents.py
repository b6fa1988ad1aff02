"""
Tests for the exponent algebra, region classifier and multiplicity count.
"""

import math
import os
import sys
import unittest
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.core.errors import ParameterError
from src.core.exponents import (Region, TheoremHypotheses, admissible_symmetries, classify_region,
                                cylindrical_bound_exponent, existence_exponent, exponent_set, nu,
                                p_star_curve, radial_existence_bands, radial_level_exponent,
                                scaling_exponent, theorem_applicability)


class TestExponentSet(unittest.TestCase):
    """Thresholds 2*, 2_alpha, 2*_alpha and p*_alpha."""

    def test_collapse_at_alpha_two(self):
        """All thresholds meet at alpha = 2."""
        ex = exponent_set(4, 2)
        self.assertEqual(ex.two_star, 4)
        self.assertEqual(ex.two_alpha, 4)
        self.assertEqual(ex.two_star_alpha, 4)
        self.assertIsNone(ex.p_star_alpha)

    def test_hand_values_alpha_three(self):
        """(N, alpha) = (4, 3) gives 2* = 4, 2*_alpha = 6, 2_alpha = 8."""
        ex = exponent_set(4, 3)
        self.assertEqual(ex.two_star, 4)
        self.assertEqual(ex.two_star_alpha, 6)
        self.assertEqual(ex.two_alpha, 8)
        self.assertEqual(ex.p_star_alpha, Fraction(14, 3))

    def test_p_star_meets_two_star_alpha(self):
        """p*_alpha = 2*_alpha exactly at alpha = 2/(N-1)."""
        ex = exponent_set(4, Fraction(2, 3))
        self.assertEqual(ex.p_star_alpha, Fraction(5, 2))
        self.assertEqual(ex.p_star_alpha, ex.two_star_alpha)

        for N in range(4, 13):
            exact = exponent_set(N, Fraction(2, N - 1))
            self.assertEqual(exact.p_star_alpha, exact.two_star_alpha)
            approx = exponent_set(N, 2.0 / (N - 1))
            self.assertLess(abs(float(approx.p_star_alpha) - float(approx.two_star_alpha)), 1e-12)

    def test_infinite_sentinels(self):
        """2_alpha and 2*_alpha become infinite past N and 2N - 2."""
        ex = exponent_set(4, 5)
        self.assertEqual(ex.two_alpha, math.inf)
        self.assertEqual(ex.two_star_alpha, 22)
        ex = exponent_set(4, 6)
        self.assertEqual(ex.two_star_alpha, math.inf)
        self.assertIsNone(ex.p_star_alpha)

    def test_ordering_on_dense_grid(self):
        """Threshold ordering on both sides of alpha = 2."""
        for N in (3, 4, 6, 9):
            for k in range(1, 400):
                alpha = k * (2 * N - 2) / 400.0
                ex = exponent_set(N, alpha)
                if alpha < 2:
                    self.assertLess(ex.two_alpha, ex.two_star_alpha)
                    self.assertLess(ex.two_star_alpha, ex.two_star)
                elif alpha > 2 and alpha < N:
                    self.assertLess(ex.two_star, ex.two_star_alpha)
                    self.assertLess(ex.two_star_alpha, ex.two_alpha)
                self.assertGreater(ex.two_star, 2)

    def test_invalid_input(self):
        """N < 3 and alpha <= 0 are rejected."""
        with self.assertRaises(ParameterError):
            exponent_set(2, 1)
        with self.assertRaises(ParameterError):
            exponent_set(4, 0)
        with self.assertRaises(ParameterError):
            exponent_set(4, -1.5)


class TestClassifyRegion(unittest.TestCase):
    """Region partition of the (alpha, p) plane."""

    def test_examples(self):
        self.assertEqual(classify_region(4, 1, 3).region, Region.RADIAL_EXISTS)
        self.assertEqual(classify_region(4, 1, 2.7).region, Region.NO_RADIAL_SOLUTION)
        self.assertEqual(classify_region(4, 2, 4).region, Region.EXPLICIT_RADIAL)
        self.assertEqual(classify_region(4, 3, 3.5).region, Region.NO_SOLUTION)

    def test_citations(self):
        self.assertEqual(classify_region(4, 1, 2.7).citations, ("[3]",))
        self.assertEqual(classify_region(4, 3, 3.5).citations, ("[11]",))
        self.assertEqual(classify_region(4, 1, 3).citation_string(), "[19,20]")

    def test_boundary_closures(self):
        """Boundary lines follow the closures of the inequalities."""
        # p = 2_alpha with alpha < 2 has no solution
        self.assertEqual(classify_region(4, 1, Fraction(8, 3)).region, Region.NO_SOLUTION)
        # p = 2*_alpha with alpha < 2 has no radial solution
        self.assertEqual(classify_region(4, 1, Fraction(14, 5)).region, Region.NO_RADIAL_SOLUTION)
        # p = 2*_alpha with 2 < alpha < 2N - 2 has no radial solution
        self.assertEqual(classify_region(4, 3, 6).region, Region.NO_RADIAL_SOLUTION)
        # p = 2_alpha with 2 < alpha < N has no solution
        self.assertEqual(classify_region(4, 3, 8).region, Region.NO_SOLUTION)
        # p = 2* away from alpha = 2
        self.assertEqual(classify_region(4, 3, 4).region, Region.NO_SOLUTION)
        self.assertEqual(classify_region(4, 1, 4).region, Region.NO_SOLUTION)

    def test_alpha_two_column(self):
        for p in (2.5, 3.0, 3.99, 4.01, 6.0, 10.0):
            self.assertEqual(classify_region(4, 2, p).region, Region.NO_SOLUTION)
        self.assertEqual(classify_region(4, 2.0, 4.0).region, Region.EXPLICIT_RADIAL)

    def test_large_alpha(self):
        """Past 2N - 2 every supercritical p has a radial solution."""
        self.assertEqual(classify_region(4, 7, 20).region, Region.RADIAL_EXISTS)
        self.assertEqual(classify_region(4, 5, 9).region, Region.RADIAL_EXISTS)
        self.assertEqual(classify_region(4, 5, 25).region, Region.NO_RADIAL_SOLUTION)

    def test_total_on_grid(self):
        """Every sampled point gets a label and every region is reached."""
        seen = set()
        for N in (3, 4, 5, 8):
            two_star = 2 * N / (N - 2)
            for i in range(1, 60):
                alpha = i * 2 * N / 60.0
                for j in range(1, 60):
                    p = 2 + j * (3 * two_star - 2) / 60.0
                    seen.add(classify_region(N, alpha, p).region)
            seen.add(classify_region(N, 2, two_star).region)
        self.assertEqual(seen, {Region.NO_SOLUTION, Region.NO_RADIAL_SOLUTION,
                                Region.RADIAL_EXISTS, Region.EXPLICIT_RADIAL})

    def test_rejects_subquadratic(self):
        with self.assertRaises(ParameterError):
            classify_region(4, 1, 2)
        with self.assertRaises(ParameterError):
            classify_region(4, 1, 1.5)

    def test_radial_bands_nested(self):
        """Earlier existence bands sit inside the widest one."""
        bands = radial_existence_bands(4, 3)
        self.assertEqual(len(bands), 3)
        widest = bands[-1]
        for _, lo, hi in bands[:-1]:
            self.assertGreaterEqual(lo, widest[1])
            self.assertLessEqual(hi, widest[2])
        self.assertEqual(radial_existence_bands(4, 2), [])

    def test_p_star_curve(self):
        curve = p_star_curve(4, [1.0, 2.0, 3.0, 7.0])
        self.assertAlmostEqual(curve[0][1], 26 / 9, places=12)
        self.assertIsNone(curve[1][1])
        self.assertAlmostEqual(curve[2][1], 14 / 3, places=12)
        self.assertIsNone(curve[3][1])


class TestNu(unittest.TestCase):
    """Multiplicity count and theorem applicability."""

    def test_spot_values(self):
        self.assertEqual(nu(4, 3, 3, 8), 1)
        self.assertEqual(nu(10, 3, 3, 8), 5)
        self.assertEqual(nu(4, 1, 2.5, 5), 1)

    def test_irrelevant_exponent_ignored(self):
        """Only p1 matters for alpha < 2 and only p2 for alpha > 2."""
        self.assertEqual(nu(4, 3, 2.1, 8), nu(4, 3, 3.9, 8))
        self.assertEqual(nu(4, 1, 2.5, 5), nu(4, 1, 2.5, 50))

    def test_rejects_alpha(self):
        for alpha in (2, 0, -1, 6, 7):
            with self.assertRaises(ParameterError):
                nu(4, alpha, 3, 8)

    def test_nondecreasing_in_N(self):
        values = [nu(N, 3, 3, 8) for N in range(4, 51)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))
        self.assertGreater(values[-1], values[0])

    def test_positive_on_valid_hypotheses(self):
        """nu >= 1 whenever the hypotheses hold."""
        count = 0
        for N in (4, 5, 6, 8, 10):
            ex_grid = [0.3 + 0.25 * k for k in range(40)]
            for alpha in ex_grid:
                if alpha == 2 or not (2 / (N - 1) < alpha < 2 * N - 2):
                    continue
                ex = exponent_set(N, alpha)
                if alpha < 2:
                    p1 = 2 + 0.5 * (float(ex.p_star_alpha) - 2)
                    p2 = float(ex.two_star) + 1
                else:
                    p1 = 2 + 0.5 * (float(ex.two_star) - 2)
                    p2 = float(ex.p_star_alpha) + 1
                report = theorem_applicability(TheoremHypotheses(N, alpha, p1, p2))
                self.assertTrue(report.applicable, (N, alpha))
                self.assertGreaterEqual(report.nu, 1)
                capped = [K for K in report.k_range if K <= N - 2]
                self.assertEqual(capped, admissible_symmetries(N, alpha, p1, p2))
                count += 1
        self.assertGreaterEqual(count, 100)

    def test_applicability_examples(self):
        report = theorem_applicability(TheoremHypotheses(4, 3, 3, 8))
        self.assertTrue(report.applicable)
        self.assertEqual(report.nu, 1)
        self.assertEqual(report.k_range, (2,))

        report = theorem_applicability(TheoremHypotheses(4, 2, 3, 8))
        self.assertFalse(report.applicable)
        self.assertTrue(report.reason)

        report = theorem_applicability(TheoremHypotheses(4, 1, 2.5, 5))
        self.assertTrue(report.applicable)
        self.assertEqual(report.nu, 1)

    def test_applicability_never_raises(self):
        for h in (TheoremHypotheses(3, 3, 3, 8), TheoremHypotheses(4, 0.5, 2.5, 5),
                  TheoremHypotheses(4, 3, 5, 8), TheoremHypotheses(4, 3, 3, 1.5)):
            self.assertFalse(theorem_applicability(h).applicable)


class TestScalingExponents(unittest.TestCase):
    """Exponents of the radial level and the cylindrical bound."""

    def test_radial_level_min_form(self):
        self.assertEqual(radial_level_exponent(4, 3, 3, 8), 1)

    def test_pure_power_scaling(self):
        self.assertEqual(scaling_exponent(4, 3, 5), Fraction(2, 3))

    def test_existence_exponent(self):
        p, exponent = existence_exponent(4, 3, 3, 8)
        self.assertEqual(p, 6)
        self.assertEqual(exponent, scaling_exponent(4, 3, 6))
        p, _ = existence_exponent(4, 1, 2.5, 5)
        self.assertEqual(p, Fraction(14, 5))

    def test_cylindrical_bound_exponent(self):
        self.assertEqual(cylindrical_bound_exponent(4, 3, 2), Fraction(1, 2))
        self.assertEqual(cylindrical_bound_exponent(4, 1, 2), Fraction(1, 2) + 2)
        with self.assertRaises(ParameterError):
            cylindrical_bound_exponent(4, 3, 3)


if __name__ == '__main__':
    unittest.main()
