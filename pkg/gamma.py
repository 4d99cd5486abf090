"""
Matrix-level identities for partially affine polynomials in one y variable.

A tuple (X_1, ..., X_n, Y) of real symmetric k x k matrices and an isometry
V (V^T V = I) form a y^2-pair when ran V reduces Y, i.e. V V^T commutes with
Y. Then V^T Y^2 V = (V^T Y V)^2, and every partially affine polynomial,
evaluated symmetrically as

    p(X, Y) = c_0(Y) + sum_i (c_i(Y) X_i + X_i c_i(Y)) / 2,

compresses exactly: V^T p(X, Y) V = p(V^T X V, V^T Y V).
"""
import logging
from dataclasses import dataclass

import numpy as np

from errors import InputError, NotIsometry
from geometry import MultiPoly
from paff import PAffPolynomial, random_paff

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
ISOMETRY_TOL = 1e-10
PAIR_TOL = 1e-9


def _symmetric(matrix):
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """
    Attributes:
        X: tuple of n symmetric k x k matrices
        Y: symmetric k x k matrix
    """
    X: tuple
    Y: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float)
        X = tuple(np.asarray(x, dtype=float) for x in self.X)
        k = Y.shape[0]
        for name, matrix in [('Y', Y)] + [(f'X{i + 1}', x) for i, x in enumerate(X)]:
            if matrix.shape != (k, k):
                raise ValueError(f"{name} has shape {matrix.shape}, expected ({k}, {k})")
            if np.abs(matrix - matrix.T).max() > SYMMETRY_TOL:
                raise ValueError(f"{name} is not symmetric")
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Y', Y)

    @property
    def k(self):
        return self.Y.shape[0]

    def compress(self, V):
        V = V.V if isinstance(V, Isometry) else np.asarray(V, dtype=float)
        return MatrixTuple(tuple(_symmetric(V.T @ x @ V) for x in self.X),
                           _symmetric(V.T @ self.Y @ V))


@dataclass(frozen=True, eq=False)
class Isometry:
    """k x r matrix with V^T V = I_r."""
    V: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        residual = np.abs(V.T @ V - np.eye(V.shape[1])).max()
        if residual > ISOMETRY_TOL:
            raise NotIsometry(f"V^T V differs from the identity by {residual:.3g}")
        object.__setattr__(self, 'V', V)


def pair_residuals(t, V):
    """
    (||(I - V V^T) Y V V^T||, ||V^T Y^2 V - (V^T Y V)^2||), spectral norms.
    """
    V = V.V
    P = V @ V.T
    reduce = np.linalg.norm((np.eye(t.k) - P) @ t.Y @ P, 2)
    squares = np.linalg.norm(V.T @ t.Y @ t.Y @ V - np.linalg.matrix_power(V.T @ t.Y @ V, 2), 2)
    return float(reduce), float(squares)


def is_y2_pair(t, V, tol=PAIR_TOL):
    """True iff ran V reduces Y (both residuals within tol)."""
    if not isinstance(V, Isometry):
        V = Isometry(V)
    return all(r <= tol for r in pair_residuals(t, V))


def eval_matrix_poly(poly, Y):
    """sum coef * Y^e for a MultiPoly in one variable."""
    result = np.zeros_like(Y)
    for (e,), coef in poly.terms:
        result = result + coef * np.linalg.matrix_power(Y, e)
    return result


def eval_paff_matrix(p, t):
    """
    Symmetric evaluation c_0(Y) + sum_i (c_i(Y) X_i + X_i c_i(Y)) / 2.

    Raises:
        InputError: unless p has m = 1 and n matching the tuple
    """
    if p.m != 1:
        raise InputError(f"matrix evaluation needs m = 1, got m = {p.m}")
    if p.n != len(t.X):
        raise InputError(f"polynomial has n = {p.n} but the tuple has {len(t.X)} X matrices")
    result = eval_matrix_poly(p.coeffs[0], t.Y)
    for c, x in zip(p.coeffs[1:], t.X):
        cy = eval_matrix_poly(c, t.Y)
        result = result + 0.5 * (cy @ x + x @ cy)
    return _symmetric(result)


def check_compression(p, t, V):
    """||V^T p(X, Y) V - p(V^T X V, V^T Y V)||, spectral norm."""
    if not isinstance(V, Isometry):
        V = Isometry(V)
    lhs = V.V.T @ eval_paff_matrix(p, t) @ V.V
    rhs = eval_paff_matrix(p, t.compress(V))
    return float(np.linalg.norm(lhs - rhs, 2))


def random_symmetric(rng, k, scale=1.0):
    A = rng.standard_normal((k, k))
    return scale * (A + A.T) / (2.0 * np.sqrt(k))


def random_orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def random_isometry(rng, k, r):
    return Isometry(random_orthogonal(rng, k)[:, :r])


def reducing_pair(rng, k, r, n=1):
    """
    Random tuple with Y = Q diag(eigs) Q^T and V spanning r eigenvectors.

    Returns:
        tuple: (MatrixTuple, Isometry)
    """
    Q = random_orthogonal(rng, k)
    eigs = rng.uniform(-1.0, 1.0, k)
    Y = _symmetric(Q @ np.diag(eigs) @ Q.T)
    X = tuple(random_symmetric(rng, k) for _ in range(n))
    return MatrixTuple(X, Y), Isometry(Q[:, :r])


def direct_sum_residual(p, X1, X2, Y, weight):
    """
    Convexity identity for V = (sqrt(t) I, sqrt(1 - t) I)^T against
    (X1 + X2, Y + Y) (direct sums):
    ||p(t X1 + (1 - t) X2, Y) - t p(X1, Y) - (1 - t) p(X2, Y)||.

    The compression of the direct sum is also evaluated, so the residual
    covers both sides of the identity.
    """
    k = Y.shape[0]
    zero = np.zeros((k, k))
    big = MatrixTuple(tuple(np.block([[a, zero], [zero, b]]) for a, b in zip(X1, X2)),
                      np.block([[Y, zero], [zero, Y]]))
    V = Isometry(np.vstack([np.sqrt(weight) * np.eye(k), np.sqrt(1.0 - weight) * np.eye(k)]))
    mixed = MatrixTuple(tuple(weight * a + (1.0 - weight) * b for a, b in zip(X1, X2)), Y)
    combo = (weight * eval_paff_matrix(p, MatrixTuple(X1, Y))
             + (1.0 - weight) * eval_paff_matrix(p, MatrixTuple(X2, Y)))
    compressed = V.V.T @ eval_paff_matrix(p, big) @ V.V
    return float(max(np.linalg.norm(eval_paff_matrix(p, mixed) - combo, 2),
                     np.linalg.norm(compressed - combo, 2)))


def covariance_residual(p, t, U):
    """||p(U^T X U, U^T Y U) - U^T p(X, Y) U|| for orthogonal U."""
    rotated = t.compress(U)
    return float(np.linalg.norm(eval_paff_matrix(p, rotated) - U.T @ eval_paff_matrix(p, t) @ U, 2))


def y_times_x1(n=1):
    """p = y * x_1."""
    zero = MultiPoly(1, ())
    coeffs = [zero, MultiPoly.variable(0, 1)] + [zero] * (n - 1)
    return PAffPolynomial(n, 1, tuple(coeffs))


def non_reducing_residual(rng, k, r, threshold=1e-6, attempts=20):
    """
    Compression residual of y * x_1 for a generic isometry, redrawing
    degenerate draws whose residual stays below ``threshold``.
    """
    p = y_times_x1()
    residual = 0.0
    for _ in range(attempts):
        t = MatrixTuple((random_symmetric(rng, k),), random_symmetric(rng, k))
        V = random_isometry(rng, k, r)
        residual = check_compression(p, t, V)
        if residual > threshold:
            return residual
    logger.warning("no generic draw above %.1e after %d attempts", threshold, attempts)
    return residual


def run_gamma_trials(rng, trials=100, sizes=(2, 4, 6), n=2, degree=3):
    """
    Randomized check of the compression identities.

    Returns:
        list of dicts, one per matrix size, with the worst residuals
    """
    rows = []
    for k in sizes:
        worst_pair, worst_sum, worst_cov = 0.0, 0.0, 0.0
        lowest_generic = np.inf
        for _ in range(trials):
            p = random_paff(rng, n, 1, degree)
            t, V = reducing_pair(rng, k, max(1, k // 2), n)
            worst_pair = max(worst_pair, check_compression(p, t, V))
            X1 = tuple(random_symmetric(rng, k) for _ in range(n))
            X2 = tuple(random_symmetric(rng, k) for _ in range(n))
            worst_sum = max(worst_sum, direct_sum_residual(p, X1, X2, t.Y, rng.uniform()))
            worst_cov = max(worst_cov, covariance_residual(p, t, random_orthogonal(rng, k)))
            lowest_generic = min(lowest_generic, non_reducing_residual(rng, k, max(1, k // 2)))
        rows.append({
            'k': k,
            'trials': trials,
            'y2_pair_residual': worst_pair,
            'direct_sum_residual': worst_sum,
            'covariance_residual': worst_cov,
            'generic_residual_min': float(lowest_generic),
        })
        logger.info("gamma trials k=%d: pair %.2e, sum %.2e", k, worst_pair, worst_sum)
    return rows
