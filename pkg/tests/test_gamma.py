"""
Tests for symmetric matrix evaluation of partially affine polynomials and
the compression identities.
"""
import os
import sys
import unittest

import numpy as np

# Add parent directory to path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import gamma  # noqa: E402
from errors import InputError, NotIsometry  # noqa: E402
from gamma import Isometry, MatrixTuple  # noqa: E402
from paff import random_paff  # noqa: E402


class TestMatrixTypes(unittest.TestCase):

    def test_rejects_non_symmetric(self):
        with self.assertRaises(ValueError):
            MatrixTuple((np.eye(2),), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(ValueError):
            MatrixTuple((np.eye(3),), np.eye(2))

    def test_isometry_check(self):
        Isometry(np.eye(3)[:, :2])
        with self.assertRaises(NotIsometry):
            Isometry(2.0 * np.eye(2))

    def test_random_isometry(self):
        V = gamma.random_isometry(np.random.default_rng(0), 5, 3)
        np.testing.assert_allclose(V.V.T @ V.V, np.eye(3), atol=1e-12)


class TestEvaluation(unittest.TestCase):

    def test_scalar_case_matches_pointwise_evaluation(self):
        """With 1 x 1 matrices the symmetric evaluation is ordinary evaluation."""
        rng = np.random.default_rng(1)
        p = random_paff(rng, 2, 1, 3)
        x, y = rng.standard_normal(2), rng.standard_normal()
        t = MatrixTuple(tuple(np.array([[v]]) for v in x), np.array([[y]]))
        self.assertAlmostEqual(float(gamma.eval_paff_matrix(p, t)[0, 0]), p.evaluate(x, [y]),
                               places=10)

    def test_commuting_case_is_product(self):
        """y * x_1 evaluated at commuting diagonal matrices is their product."""
        X = np.diag([1.0, 2.0, 3.0])
        Y = np.diag([-1.0, 0.5, 2.0])
        value = gamma.eval_paff_matrix(gamma.y_times_x1(), MatrixTuple((X,), Y))
        np.testing.assert_allclose(value, X @ Y, atol=1e-12)

    def test_result_is_symmetric(self):
        rng = np.random.default_rng(2)
        p = random_paff(rng, 2, 1, 3)
        t = MatrixTuple(tuple(gamma.random_symmetric(rng, 4) for _ in range(2)),
                        gamma.random_symmetric(rng, 4))
        value = gamma.eval_paff_matrix(p, t)
        np.testing.assert_allclose(value, value.T, atol=1e-14)

    def test_requires_one_y_variable(self):
        p = random_paff(np.random.default_rng(3), 1, 2, 1)
        with self.assertRaises(InputError):
            gamma.eval_paff_matrix(p, MatrixTuple((np.eye(2),), np.eye(2)))

    def test_requires_matching_n(self):
        p = random_paff(np.random.default_rng(4), 2, 1, 1)
        with self.assertRaises(InputError):
            gamma.eval_paff_matrix(p, MatrixTuple((np.eye(2),), np.eye(2)))


class TestCompression(unittest.TestCase):
    """Exact compression on y^2-pairs, failure on generic isometries."""

    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_reducing_pairs_compress_exactly(self):
        for k in (2, 4, 6):
            for _ in range(34):
                p = random_paff(self.rng, 2, 1, 3)
                t, V = gamma.reducing_pair(self.rng, k, k // 2, n=2)
                self.assertTrue(gamma.is_y2_pair(t, V))
                self.assertLess(gamma.check_compression(p, t, V), 1e-9)

    def test_generic_isometry_is_not_a_pair(self):
        t = MatrixTuple((gamma.random_symmetric(self.rng, 4),), gamma.random_symmetric(self.rng, 4))
        V = gamma.random_isometry(self.rng, 4, 2)
        self.assertFalse(gamma.is_y2_pair(t, V))
        reduce, _ = gamma.pair_residuals(t, V)
        self.assertGreater(reduce, 1e-6)

    def test_generic_compression_fails(self):
        for k in (2, 4, 6):
            self.assertGreater(gamma.non_reducing_residual(self.rng, k, k // 2), 1e-6)

    def test_direct_sum_identity(self):
        for trial in range(100):
            k = int(self.rng.integers(1, 5))
            p = random_paff(self.rng, 2, 1, 3)
            X1 = tuple(gamma.random_symmetric(self.rng, k) for _ in range(2))
            X2 = tuple(gamma.random_symmetric(self.rng, k) for _ in range(2))
            Y = gamma.random_symmetric(self.rng, k)
            residual = gamma.direct_sum_residual(p, X1, X2, Y, self.rng.uniform())
            self.assertLess(residual, 1e-9, trial)

    def test_unitary_covariance(self):
        p = random_paff(self.rng, 2, 1, 3)
        t = MatrixTuple(tuple(gamma.random_symmetric(self.rng, 4) for _ in range(2)),
                        gamma.random_symmetric(self.rng, 4))
        U = gamma.random_orthogonal(self.rng, 4)
        self.assertLess(gamma.covariance_residual(p, t, U), 1e-9)


class TestTrials(unittest.TestCase):

    def test_run_gamma_trials(self):
        rows = gamma.run_gamma_trials(np.random.default_rng(6), trials=3, sizes=(2, 4))
        self.assertEqual([row['k'] for row in rows], [2, 4])
        for row in rows:
            self.assertEqual(row['trials'], 3)
            self.assertLess(row['y2_pair_residual'], 1e-9)
            self.assertLess(row['direct_sum_residual'], 1e-9)
            self.assertLess(row['covariance_residual'], 1e-9)
            self.assertGreater(row['generic_residual_min'], 1e-6)

    def test_deterministic_for_a_seed(self):
        first = gamma.run_gamma_trials(np.random.default_rng(7), trials=2, sizes=(2,))
        second = gamma.run_gamma_trials(np.random.default_rng(7), trials=2, sizes=(2,))
        self.assertEqual(first, second)


if __name__ == '__main__':
    unittest.main()
