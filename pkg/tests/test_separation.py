"""
Tests for separating partially affine polynomials and continuous separators.
"""
import dataclasses
import math
import os
import sys
import unittest

import numpy as np

# Add parent directory to path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import separation  # noqa: E402
from errors import PointInsideSet  # noqa: E402
from geometry import fig1, fig1_radius, l_set, membership, unit_box  # noqa: E402
from separation import Branch, SeparationCertificate  # noqa: E402


def grid_gamma(pc_set, y_z):
    """Squared distance from y_z to the nearest grid point with a nonempty slice."""
    points = np.array([y for y, poly in zip(pc_set.grid.points, pc_set.grid_slices)
                       if not poly.is_empty])
    return float(np.min(np.sum((points - y_z) ** 2, axis=1)))


def random_outside_point(rng, pc_set, margin=1e-3):
    """Point near the set (y up to 0.5 outside the box) that is clearly not in it."""
    lows = np.array([lo for lo, _ in pc_set.grid.box]) - 0.5
    highs = np.array([hi for _, hi in pc_set.grid.box]) + 0.5
    while True:
        x = rng.uniform(-2.0, 2.0, pc_set.n)
        y = rng.uniform(lows, highs)
        if not membership(pc_set, x, y, tol=margin):
            return np.concatenate([x, y])


class TestUnitBox(unittest.TestCase):
    """Hand-computed certificate for (2, 0) against [-1, 1] x [-1, 1]."""

    def setUp(self):
        self.pc_set = unit_box()
        self.cert = separation.separate_polynomial(self.pc_set, [2.0, 0.0])

    def test_branch_and_coefficients(self):
        self.assertIs(self.cert.branch, Branch.SLICE_NONEMPTY)
        np.testing.assert_allclose(self.cert.v, [-1.0], atol=1e-9)
        self.assertAlmostEqual(self.cert.c, 1.2, places=9)
        self.assertAlmostEqual(self.cert.delta, 0.2, places=9)
        self.assertEqual(self.cert.M, 0.0)

    def test_validation(self):
        report = self.cert.validation
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.min_on_K, 0.2, places=9)
        self.assertAlmostEqual(report.value_at_z, -0.8, places=9)

    def test_to_paff_matches_evaluate(self):
        p = self.cert.to_paff()
        for x, y in [(0.3, -0.7), (-1.0, 1.0), (2.0, 0.0)]:
            self.assertAlmostEqual(p.evaluate([x], [y]), self.cert.evaluate([x], [y]), places=12)

    def test_max_margin_direction(self):
        v, h = separation.max_margin_direction(self.pc_set.grid_slices[10], np.array([2.0]))
        np.testing.assert_allclose(v, [-1.0], atol=1e-9)
        self.assertAlmostEqual(h, -1.0, places=9)


class TestFig1(unittest.TestCase):
    """Both branches on the hyperbola set."""

    def setUp(self):
        self.pc_set = fig1()

    def test_empty_slice_branch(self):
        """z = (0, 2): y_z is outside the projection, gamma = 1 and M = 1."""
        cert = separation.separate_polynomial(self.pc_set, [0.0, 2.0])
        self.assertIs(cert.branch, Branch.SLICE_EMPTY)
        self.assertAlmostEqual(cert.gamma, 1.0, places=12)
        self.assertAlmostEqual(cert.M, 1.0, places=12)
        self.assertEqual(cert.c, -1.0)
        self.assertAlmostEqual(cert.validation.min_on_K, 0.0, places=12)
        self.assertAlmostEqual(cert.validation.value_at_z, -1.0, places=12)
        self.assertTrue(cert.validation.passed)

    def test_nonempty_slice_needs_curvature(self):
        """z = (0.9, 0) is separated on its slice but not by the slice-wise line alone."""
        cert = separation.separate_polynomial(self.pc_set, [0.9, 0.0])
        self.assertIs(cert.branch, Branch.SLICE_NONEMPTY)
        self.assertGreater(cert.M, 0.0)
        self.assertTrue(cert.validation.passed)
        minima = separation.min_value_function(self.pc_set, cert.v, cert.c)
        self.assertLess(np.nanmin(minima), 0.0)

    def test_point_inside_raises(self):
        with self.assertRaises(PointInsideSet):
            separation.separate_polynomial(self.pc_set, [0.0, 0.0])
        with self.assertRaises(PointInsideSet):
            separation.separate_continuous(self.pc_set, [0.5, 0.5])

    def test_wrong_point_length(self):
        with self.assertRaises(ValueError):
            separation.separate_polynomial(self.pc_set, [0.0, 2.0, 1.0])

    def test_continuous_distance_separator(self):
        sep = separation.separate_continuous(self.pc_set, [0.0, 2.0])
        self.assertEqual(sep.kind, 'distance')
        self.assertAlmostEqual(sep.evaluate([0.0], [2.0]), -0.5, places=12)
        self.assertTrue(sep.validation.passed)
        self.assertAlmostEqual(sep.validation.min_on_K, 0.5, places=12)

    def test_continuous_correction_term(self):
        """mu is positive exactly where the minimum value function is negative."""
        sep = separation.separate_continuous(self.pc_set, [0.9, 0.0])
        self.assertEqual(sep.kind, 'correction')
        self.assertTrue(sep.validation.passed)
        negative = np.nan_to_num(sep.min_values, nan=1.0) < 0
        np.testing.assert_array_equal(sep.mu > 0, negative)
        self.assertTrue(negative.any())
        self.assertTrue(math.isnan(sep.mu_at([0.33])))
        self.assertEqual(sep.mu_at([0.0]), 0.0)

    def test_min_value_function_matches_radius(self):
        """min over [-r, r] of -x + 1 is 1 - r(y)."""
        minima = separation.min_value_function(self.pc_set, [-1.0], 1.0)
        expected = 1.0 - fig1_radius(self.pc_set.grid.points[:, 0])
        np.testing.assert_allclose(minima, expected, atol=1e-9)

    def test_validate_rejects_bad_certificate(self):
        cert = SeparationCertificate(Branch.SLICE_NONEMPTY, np.array([-1.0]), 0.5, 0.0,
                                     np.array([0.0]))
        report = separation.validate_certificate(self.pc_set, cert, [2.0, 0.0])
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.min_on_K, -0.5, places=9)
        x, y = report.argmin
        self.assertAlmostEqual(x[0], 1.0, places=9)
        self.assertAlmostEqual(abs(y[0]), 1.0, places=12)

    def test_projection_gamma(self):
        self.assertAlmostEqual(separation.projection_gamma(self.pc_set, [1.5]), 0.25)


class TestRandomInstances(unittest.TestCase):
    """Seeded random points outside several sets always get a validated certificate."""

    def _check(self, pc_set, seed, count):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            z = random_outside_point(rng, pc_set)
            cert = separation.separate_polynomial(pc_set, z)
            self.assertTrue(cert.validation.passed, msg=f"{pc_set.name} z={z}")
            self.assertGreaterEqual(cert.validation.min_on_K, -1e-7)
            self.assertLess(cert.evaluate(z[:pc_set.n], z[pc_set.n:]), 0.0)
            if cert.branch is Branch.SLICE_EMPTY:
                expected = grid_gamma(pc_set, z[pc_set.n:])
                self.assertAlmostEqual(cert.gamma, expected, delta=1e-6)
                self.assertGreaterEqual(cert.M * expected, 1.0 - 1e-6)
            for larger in (cert.M + 1.0, 2.0 * cert.M):
                bigger = dataclasses.replace(cert, M=larger, validation=None)
                self.assertTrue(separation.validate_certificate(pc_set, bigger, z).passed,
                                msg=f"{pc_set.name} z={z} M={larger}")
            sep = separation.separate_continuous(pc_set, z)
            self.assertTrue(sep.validation.passed, msg=f"{pc_set.name} z={z}")

    def test_unit_box(self):
        self._check(unit_box(), 1, 30)

    def test_fig1(self):
        self._check(fig1(), 2, 30)

    def test_l_set(self):
        self._check(l_set(), 3, 25)

    def test_two_dimensional_x(self):
        self._check(unit_box(2, 1, points_per_axis=11), 4, 10)

    def test_two_dimensional_y(self):
        self._check(unit_box(1, 2, points_per_axis=5), 5, 5)


if __name__ == '__main__':
    unittest.main()
