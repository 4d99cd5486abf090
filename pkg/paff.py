"""
Partially affine functions on a partially convex set.

``PAffPolynomial`` has polynomial coefficients c_0(y), ..., c_n(y);
``CAffFunction`` stores coefficient vectors sampled on the base grid. On a
regular set a function that is affine on every slice has unique
coefficients, recovered here from n + 1 interior evaluations per grid point,
and every such function is a uniform limit of partially affine polynomials
(tensor Bernstein approximation of the coefficients).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import RegularGridInterpolator
from scipy.special import comb

import lp
from config import DEFAULT_EPS_INT
from errors import DegenerateSlice, GridNotTensor, InputError, SingularSystem
from geometry import MultiPoly

logger = logging.getLogger(__name__)

DET_TOL = 1e-12
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PAffPolynomial:
    """
    p(x, y) = c_0(y) + sum_i c_i(y) x_i.

    Attributes:
        n: dimension of x
        m: dimension of y
        coeffs: tuple of n + 1 MultiPoly in m variables
    """
    n: int
    m: int
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if len(coeffs) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} coefficient polynomials, got {len(coeffs)}")
        if any(c.num_vars != self.m for c in coeffs):
            raise ValueError("coefficient polynomials must be in m variables")
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def from_values(cls, values, m):
        """Constant-coefficient polynomial from a vector (c_0, ..., c_n)."""
        values = np.asarray(values, dtype=float).reshape(-1)
        return cls(values.size - 1, m, tuple(MultiPoly.constant(v, m) for v in values))

    def coefficient_values(self, y):
        """Coefficients at one point, shape (n+1,), or many points, shape (N, n+1)."""
        y = np.asarray(y, dtype=float)
        if y.ndim <= 1:
            return np.array([c.evaluate(y) for c in self.coeffs])
        return np.column_stack([c.evaluate(y) for c in self.coeffs])

    def evaluate(self, x, y):
        coeffs = self.coefficient_values(y)
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(coeffs[0] + coeffs[1:] @ x)


@dataclass(frozen=True, eq=False)
class CAffFunction:
    """
    Continuous partially affine function sampled on a grid.

    Attributes:
        n: dimension of x
        grid: BaseGrid
        values: shape (G, n+1), row k is (c_0, ..., c_n) at grid point k;
            NaN rows mark grid points outside the projection
    """
    n: int
    grid: object
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(self.grid.size, self.n + 1)
        object.__setattr__(self, 'values', values)

    @property
    def defined(self):
        return ~np.isnan(self.values).any(axis=1)

    def evaluate(self, index, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        row = self.values[index]
        return float(row[0] + row[1:] @ x)


def eval_paff(p, x, y):
    """c_0(y) + sum_i c_i(y) x_i."""
    return p.evaluate(x, y)


def interior_points(poly, step_fraction=0.5, flip=False):
    """
    n + 1 affinely independent interior points of a slice.

    The Chebyshev center x_c and x_c + s * step_fraction * rho * e_i, with
    s = -1 when ``flip`` is set. Every point stays inside the inscribed ball.
    """
    center, radius = poly.chebyshev_center, poly.chebyshev_radius
    step = (-1.0 if flip else 1.0) * step_fraction * radius
    return np.vstack([center, center + step * np.eye(poly.n)])


def recover_coefficients(pc_set, f, eps_int=DEFAULT_EPS_INT, step_fraction=0.5, flip=False):
    """
    Recover the coefficient functions of a partially affine f on K.

    At each grid point with a nonempty slice, f is evaluated at n + 1
    interior points and M(y) c(y) = F(y) is solved, where row j of M(y) is
    (1, x_j).

    Args:
        pc_set: PartiallyConvexSet
        f: callable f(x, y) -> float, defined on K
        eps_int: minimum Chebyshev radius
        step_fraction, flip: interior point selection (see interior_points)

    Returns:
        CAffFunction (NaN rows where the slice is empty)

    Raises:
        DegenerateSlice: if a nonempty slice has radius below eps_int
        SingularSystem: if |det M(y)| < 1e-12
    """
    n = pc_set.n
    values = np.full((pc_set.grid.size, n + 1), np.nan)
    for i, poly in enumerate(pc_set.grid_slices):
        if poly.is_empty:
            continue
        y = pc_set.grid.points[i]
        if poly.chebyshev_radius < eps_int:
            raise DegenerateSlice(y, poly.chebyshev_radius)
        points = interior_points(poly, step_fraction, flip)
        system = np.hstack([np.ones((n + 1, 1)), points])
        det = np.linalg.det(system)
        if abs(det) < DET_TOL:
            raise SingularSystem(y, det)
        rhs = np.array([f(x, y) for x in points])
        coeffs = np.linalg.solve(system, rhs)
        residual = np.abs(system @ coeffs - rhs).max()
        if residual > RESIDUAL_TOL:
            logger.warning("recovery residual %.3g at y=%s", residual, y)
        values[i] = coeffs
    logger.info("recovered coefficients at %d grid points",
                int(np.count_nonzero(~np.isnan(values[:, 0]))))
    return CAffFunction(n, pc_set.grid, values)


def embed_paff(pc_set, p):
    """CAffFunction of a PAffPolynomial restricted to the projection of K."""
    values = p.coefficient_values(pc_set.grid.points).reshape(pc_set.grid.size, p.n + 1)
    values[~pc_set.projection_mask] = np.nan
    return CAffFunction(p.n, pc_set.grid, values)


def _bernstein_monomials(lo, hi, degree):
    """
    Row k holds the ascending monomial coefficients in y of
    binom(d, k) t^k (1 - t)^(d - k) with t = (y - lo) / (hi - lo).
    """
    width = hi - lo
    to_y = [-lo / width, 1.0 / width]
    table = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        in_t = comb(degree, k) * npoly.polymul(
            npoly.polypow([0.0, 1.0], k), npoly.polypow([1.0, -1.0], degree - k))
        in_y = np.zeros(degree + 1)
        for j, a in enumerate(in_t):
            term = a * npoly.polypow(to_y, j)
            in_y[:term.size] += term
        table[k] = in_y
    return table


def approx_bernstein(c, degree):
    """
    Tensor-product Bernstein approximation of every coefficient function.

    Node values c(lo + k (hi - lo) / d) are read from the grid by linear
    interpolation (exact when the nodes are grid points), then each
    coefficient is expanded into monomials.

    Returns:
        PAffPolynomial

    Raises:
        GridNotTensor: if the grid is not a full tensor grid
    """
    grid = c.grid
    if not grid.is_tensor or any(len(axis) < 2 for axis in grid.axes):
        raise GridNotTensor("Bernstein approximation needs a tensor grid with 2+ points per axis")
    if degree < 1:
        raise InputError(f"degree must be at least 1, got {degree}")
    if not c.defined.all():
        raise InputError("coefficients are undefined at some grid points")
    m = grid.m
    shape = tuple(len(axis) for axis in grid.axes)
    nodes = [np.linspace(lo, hi, degree + 1) for lo, hi in grid.box]
    node_points = np.stack(np.meshgrid(*nodes, indexing='ij'), axis=-1).reshape(-1, m)
    tables = [_bernstein_monomials(lo, hi, degree) for lo, hi in grid.box]

    coeffs = []
    for col in range(c.n + 1):
        interp = RegularGridInterpolator(grid.axes, c.values[:, col].reshape(shape))
        node_values = interp(node_points).reshape((degree + 1,) * m)
        monomial = node_values
        for table in tables:
            monomial = np.tensordot(monomial, table, axes=([0], [0]))
        terms = tuple((exps, float(monomial[exps]))
                      for exps in np.ndindex(*monomial.shape) if monomial[exps] != 0.0)
        coeffs.append(MultiPoly(m, terms))
    logger.debug("Bernstein degree %d over box %s", degree, grid.box)
    return PAffPolynomial(c.n, m, tuple(coeffs))


def sup_distance(pc_set, f, p):
    """
    sup over K of |f - p|, exact on every grid slice.

    With D = f - p = D_0 + <D_x, x> on a slice, the maximum of |D| is
    max(D_0 + h(D_x), -D_0 + h(-D_x)) where h is the support function.
    """
    worst = 0.0
    for i, poly in enumerate(pc_set.grid_slices):
        if poly.is_empty or not f.defined[i]:
            continue
        diff = f.values[i] - p.coefficient_values(pc_set.grid.points[i])
        if np.any(diff[1:]):
            upper = diff[0] + lp.support(poly, diff[1:])
            lower = -diff[0] + lp.support(poly, -diff[1:])
        else:
            upper, lower = diff[0], -diff[0]
        worst = max(worst, upper, lower)
    return float(worst)


def approximation_error_bound(pc_set, f, p):
    """
    Uniform bound eps_0 + sum_i eps_i sup_K |x_i| from per-coefficient errors.

    Always at least sup_distance(pc_set, f, p).
    """
    mask = pc_set.projection_mask & f.defined
    if not mask.any():
        return 0.0
    diff = f.values[mask] - p.coefficient_values(pc_set.grid.points[mask]).reshape(-1, f.n + 1)
    eps = np.abs(diff).max(axis=0)
    eye = np.eye(pc_set.n)
    reach = np.zeros(pc_set.n)
    for i in np.flatnonzero(mask):
        poly = pc_set.grid_slices[i]
        for j in range(pc_set.n):
            reach[j] = max(reach[j], lp.support(poly, eye[j]), lp.support(poly, -eye[j]))
    return float(eps[0] + eps[1:] @ reach)


def coefficient_modulus(c):
    """
    Neighbor-difference modulus of each recovered coefficient.

    Returns:
        list of dicts: {'coefficient', 'max_jump', 'max_rate'} where the rate
        is the jump divided by the distance between the two grid points
    """
    pairs = [(i, j) for i, j in c.grid.neighbor_pairs() if c.defined[i] and c.defined[j]]
    report = []
    for col in range(c.n + 1):
        max_jump, max_rate = 0.0, 0.0
        for i, j in pairs:
            jump = abs(c.values[i, col] - c.values[j, col])
            gap = float(np.linalg.norm(c.grid.points[i] - c.grid.points[j]))
            max_jump = max(max_jump, jump)
            max_rate = max(max_rate, jump / gap)
        report.append({'coefficient': f'c{col}', 'max_jump': max_jump, 'max_rate': max_rate})
    return report


def random_paff(rng, n, m, degree):
    """PAffPolynomial with standard normal coefficients up to total degree ``degree``."""
    exps = [e for e in np.ndindex(*([degree + 1] * m)) if sum(e) <= degree]
    coeffs = tuple(MultiPoly(m, tuple((e, rng.standard_normal()) for e in exps))
                   for _ in range(n + 1))
    return PAffPolynomial(n, m, coeffs)


def bernstein_bound(modulus, degree):
    """Classical envelope (3/2) * omega(1 / sqrt(d)) given a modulus callable."""
    return 1.5 * modulus(1.0 / math.sqrt(degree))
