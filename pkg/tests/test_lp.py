"""
Tests for the dense simplex engine and the polytope helpers built on it.

Random instances are cross-checked against scipy's HiGHS solver.
"""
import os
import sys
import unittest
from types import SimpleNamespace

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

# Add parent directory to path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import lp  # noqa: E402
from errors import DimensionTooLarge, EmptyPolytope  # noqa: E402


class Box:
    """Axis-aligned box as an object with A and b."""

    def __init__(self, lows, highs):
        n = len(lows)
        self.A = np.vstack([np.eye(n), -np.eye(n)])
        self.b = np.concatenate([np.asarray(highs, float), -np.asarray(lows, float)])


def random_feasible_lp(seed, n=3, k=8):
    """Feasible, bounded LP: random rows around an interior point plus a box."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, n))
    x0 = rng.uniform(-1.0, 1.0, n)
    b = A @ x0 + rng.uniform(0.1, 1.0, k)
    A = np.vstack([A, np.eye(n), -np.eye(n)])
    b = np.concatenate([b, np.full(2 * n, 5.0)])
    return lp.LinearProgram(rng.standard_normal(n), A, b)


class TestSolve(unittest.TestCase):
    """Statuses and optimal values on small hand-checked problems."""

    def test_min_x_on_interval(self):
        """min x on [-1, 1] is -1."""
        result = lp.solve(lp.LinearProgram([1.0], [[1.0], [-1.0]], [1.0, 1.0]))
        self.assertEqual(result.status, lp.LpStatus.OPTIMAL)
        self.assertAlmostEqual(result.value, -1.0, places=12)

    def test_infeasible(self):
        """x <= -2 and -x <= -2 cannot both hold."""
        result = lp.solve(lp.LinearProgram([1.0], [[1.0], [-1.0]], [-2.0, -2.0]))
        self.assertEqual(result.status, lp.LpStatus.INFEASIBLE)
        self.assertFalse(result.optimal)

    def test_sum_on_square(self):
        """min x1 + x2 on [-1, 1]^2 is -2 at (-1, -1)."""
        box = Box([-1, -1], [1, 1])
        result = lp.solve(lp.LinearProgram([1.0, 1.0], box.A, box.b))
        self.assertAlmostEqual(result.value, -2.0, places=12)
        np.testing.assert_allclose(result.x, [-1.0, -1.0], atol=1e-12)

    def test_unbounded(self):
        """min -x subject to x >= 0 is unbounded."""
        result = lp.solve(lp.LinearProgram([-1.0], [[-1.0]], [0.0]))
        self.assertEqual(result.status, lp.LpStatus.UNBOUNDED)

    def test_rejects_non_finite_rows(self):
        with self.assertRaises(ValueError):
            lp.LinearProgram([1.0], [[np.inf]], [1.0])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_matches_scipy(self, seed):
        """Optimal values agree with scipy.optimize.linprog."""
        problem = random_feasible_lp(seed)
        ours = lp.solve(problem)
        ref = linprog(problem.c, A_ub=problem.A, b_ub=problem.b,
                      bounds=[(None, None)] * problem.n, method='highs')
        self.assertTrue(ours.optimal)
        self.assertAlmostEqual(ours.value, ref.fun, places=7)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_point_feasible_and_duality_gap(self, seed):
        """The point is feasible and the row multipliers certify the same bound."""
        problem = random_feasible_lp(seed)
        result = lp.solve(problem)
        self.assertTrue(np.all(problem.A @ result.x <= problem.b + 1e-9))
        self.assertAlmostEqual(result.value, float(problem.c @ result.x), places=9)
        self.assertTrue(np.all(result.duals >= 0))
        np.testing.assert_allclose(problem.A.T @ result.duals, -problem.c, atol=1e-7)
        self.assertAlmostEqual(-float(problem.b @ result.duals), result.value, delta=1e-7)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_row_permutation_invariance(self, seed):
        """Shuffling the rows does not change the optimal value."""
        problem = random_feasible_lp(seed)
        order = np.random.default_rng(seed + 1).permutation(problem.A.shape[0])
        shuffled = lp.LinearProgram(problem.c, problem.A[order], problem.b[order])
        self.assertAlmostEqual(lp.solve(problem).value, lp.solve(shuffled).value, places=9)

    def test_deterministic(self):
        problem = random_feasible_lp(7)
        first, second = lp.solve(problem), lp.solve(problem)
        np.testing.assert_array_equal(first.x, second.x)


class TestPolytopeHelpers(unittest.TestCase):
    """Chebyshev ball, support function, distance and vertices."""

    def test_chebyshev_square(self):
        center, radius = lp.chebyshev(Box([-1, -1], [1, 1]))
        np.testing.assert_allclose(center, [0.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(radius, 1.0, places=12)

    def test_chebyshev_rectangle(self):
        """[0, 3] x [0, 1] has inscribed radius 0.5."""
        _, radius = lp.chebyshev(Box([0, 0], [3, 1]))
        self.assertAlmostEqual(radius, 0.5, places=12)

    def test_chebyshev_point(self):
        """{0} written as x <= 0, -x <= 0 has radius 0."""
        _, radius = lp.chebyshev(Box([0], [0]))
        self.assertAlmostEqual(radius, 0.0, places=12)

    def test_chebyshev_empty(self):
        self.assertIsNone(lp.chebyshev(Box([1], [0])))

    def test_chebyshev_center_has_slack(self):
        """Every row keeps slack radius * ||a|| at the center."""
        problem = random_feasible_lp(3)
        center, radius = lp.chebyshev(problem)
        slack = problem.b - problem.A @ center
        self.assertTrue(np.all(slack >= radius * np.linalg.norm(problem.A, axis=1) - 1e-9))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_chebyshev_monotone_under_rows(self, seed):
        """Adding a row never increases the radius."""
        problem = random_feasible_lp(seed)
        _, before = lp.chebyshev(problem)
        rng = np.random.default_rng(seed)
        extra = SimpleNamespace(
            A=np.vstack([problem.A, rng.standard_normal((1, 3))]),
            b=np.append(problem.b, rng.uniform(0.0, 1.0)))
        ball = lp.chebyshev(extra)
        if ball is not None:
            self.assertLessEqual(ball[1], before + 1e-9)

    def test_support(self):
        self.assertAlmostEqual(lp.support(Box([-1], [1]), [1.0]), 1.0, places=12)
        self.assertAlmostEqual(lp.support(Box([-1, -1], [1, 1]), [1.0, 1.0]), 2.0, places=12)

    def test_support_of_empty_raises(self):
        with self.assertRaises(EmptyPolytope):
            lp.support(Box([1], [0]), [1.0])

    def test_support_point(self):
        point = lp.support_point(Box([-1, -2], [1, 2]), [0.0, -1.0])
        self.assertAlmostEqual(point[1], -2.0, places=12)

    def test_is_feasible(self):
        self.assertTrue(lp.is_feasible(Box([-1], [1]).A, Box([-1], [1]).b))
        self.assertFalse(lp.is_feasible(Box([1], [0]).A, Box([1], [0]).b))

    def test_distance_inf(self):
        """(2, 0.5) is at inf-distance 1 from the unit square."""
        self.assertAlmostEqual(lp.distance_inf(Box([-1, -1], [1, 1]), [2.0, 0.5]), 1.0, places=10)
        self.assertAlmostEqual(lp.distance_inf(Box([-1, -1], [1, 1]), [0.0, 0.5]), 0.0, places=10)

    def test_vertices_square(self):
        verts = lp.vertices(Box([-1, -1], [1, 1]))
        np.testing.assert_allclose(verts, [[-1, -1], [-1, 1], [1, -1], [1, 1]], atol=1e-12)

    def test_vertices_dimension_guard(self):
        with self.assertRaises(DimensionTooLarge):
            lp.vertices(Box([0] * 4, [1] * 4))


if __name__ == '__main__':
    unittest.main()
