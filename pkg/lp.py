"""
Dense linear programming for slice problems.

A small two-phase tableau simplex with Bland's anti-cycling rule. Problems
here are tiny (n <= 10 variables, a few hundred rows), so the dense tableau
is fast enough and fully deterministic.

Every LP is stated as

    minimize    c . x
    subject to  A x <= b,   x free

Polytope helpers (Chebyshev ball, support function, vertices, distance)
accept any object exposing ``A`` (k x n) and ``b`` (k,) arrays, e.g. a
``geometry.SlicePolytope``.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from errors import DimensionTooLarge, EmptyPolytope

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
MAX_PIVOTS = 50_000


class LpStatus(Enum):
    OPTIMAL = 'Optimal'
    INFEASIBLE = 'Infeasible'
    UNBOUNDED = 'Unbounded'


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    minimize c . x subject to A x <= b.

    Attributes:
        c: objective vector, shape (n,)
        A: constraint matrix, shape (k, n)
        b: right-hand side, shape (k,)
    """
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float).reshape(-1, c.size)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if c.size < 1:
            raise ValueError("a linear program needs at least one variable")
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("constraint rows must be finite")
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)

    @property
    def n(self):
        return self.c.size


@dataclass(frozen=True, eq=False)
class LpResult:
    """
    Outcome of ``solve``.

    Attributes:
        status: LpStatus
        value: optimal objective value (None unless OPTIMAL)
        x: optimal point (None unless OPTIMAL)
        duals: row multipliers lambda >= 0 with A^T lambda = -c and
            -b . lambda = value (None unless OPTIMAL)
    """
    status: LpStatus
    value: float = None
    x: np.ndarray = None
    duals: np.ndarray = None

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def _pivot(T, row, col):
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])
    rhs = T[:-1, -1]
    rhs[np.abs(rhs) < 1e-13] = 0.0


def _price(T, basis, cost):
    """Fill the objective row of T with reduced costs for ``cost``."""
    cb = cost[basis]
    T[-1, :-1] = cost - cb @ T[:-1, :-1]
    T[-1, -1] = -(cb @ T[:-1, -1])


def _run(T, basis, allowed):
    """
    Bland-rule primal simplex on tableau T (objective in the last row).

    Returns:
        str: 'optimal' or 'unbounded'
    """
    allowed = np.asarray(allowed)
    for _ in range(MAX_PIVOTS):
        reduced = T[-1, allowed]
        entering = np.flatnonzero(reduced < -PIVOT_TOL)
        if entering.size == 0:
            return 'optimal'
        col = int(allowed[entering[0]])
        column = T[:-1, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return 'unbounded'
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        # Bland: among tied rows leave the basic variable with smallest index
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex exceeded the pivot limit")


def solve(lp):
    """
    Solve a linear program with the two-phase simplex method.

    Args:
        lp: LinearProgram

    Returns:
        LpResult: status, optimal value, point and dual multipliers
    """
    A, b, c = lp.A, lp.b, lp.c
    k, n = A.shape
    if k == 0:
        if np.allclose(c, 0.0):
            return LpResult(LpStatus.OPTIMAL, 0.0, np.zeros(n), np.zeros(0))
        return LpResult(LpStatus.UNBOUNDED)

    # x = p - q with p, q >= 0; one slack per row; rows with b < 0 are
    # negated and get an artificial variable.
    sign = np.where(b < 0, -1.0, 1.0)
    needs_art = np.flatnonzero(sign < 0)
    n_struct = 2 * n + k
    n_cols = n_struct + needs_art.size

    E = np.zeros((k, n_cols))
    E[:, :n] = A * sign[:, None]
    E[:, n:2 * n] = -A * sign[:, None]
    E[:, 2 * n:n_struct] = np.diag(sign)
    basis = list(range(2 * n, n_struct))
    for j, i in enumerate(needs_art):
        E[i, n_struct + j] = 1.0
        basis[i] = n_struct + j

    T = np.zeros((k + 1, n_cols + 1))
    T[:k, :n_cols] = E
    T[:k, -1] = b * sign

    if needs_art.size:
        phase1 = np.zeros(n_cols)
        phase1[n_struct:] = 1.0
        _price(T, basis, phase1)
        _run(T, basis, np.arange(n_cols))
        if -T[-1, -1] > 1e-8 * max(1.0, np.abs(b).max()):
            return LpResult(LpStatus.INFEASIBLE)
        # drive zero-level artificials out of the basis where possible
        for row, var in enumerate(basis):
            if var < n_struct:
                continue
            candidates = np.flatnonzero(np.abs(T[row, :n_struct]) > PIVOT_TOL)
            if candidates.size:
                _pivot(T, row, int(candidates[0]))
                basis[row] = int(candidates[0])

    cost = np.zeros(n_cols)
    cost[:n] = c
    cost[n:2 * n] = -c
    _price(T, basis, cost)
    if _run(T, basis, np.arange(n_struct)) == 'unbounded':
        return LpResult(LpStatus.UNBOUNDED)

    z = np.zeros(n_cols)
    z[basis] = T[:k, -1]
    x = z[:n] - z[n:2 * n]

    B = E[:, basis]
    try:
        y = np.linalg.solve(B.T, cost[basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
    duals = np.maximum(-sign * y, 0.0)
    return LpResult(LpStatus.OPTIMAL, float(c @ x), x, duals)


def chebyshev(poly):
    """
    Largest inscribed Euclidean ball of {x : A x <= b}.

    Args:
        poly: object with ``A`` and ``b``

    Returns:
        tuple: (center, radius), or None when the polytope is empty.
            radius is ``inf`` for an unbounded polyhedron containing
            arbitrarily large balls.
    """
    A = np.asarray(poly.A, dtype=float)
    b = np.asarray(poly.b, dtype=float)
    n = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    rows = np.vstack([np.hstack([A, norms[:, None]]),
                      np.hstack([np.zeros((1, n)), [[-1.0]]])])
    rhs = np.append(b, 0.0)
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    result = solve(LinearProgram(objective, rows, rhs))
    if result.status is LpStatus.INFEASIBLE:
        return None
    if result.status is LpStatus.UNBOUNDED:
        return np.zeros(n), np.inf
    radius = max(0.0, float(result.x[-1]))
    return result.x[:n], radius


def support(poly, direction):
    """
    Support function h(d) = max d . x over the polytope.

    Raises:
        EmptyPolytope: if the polytope is empty
    """
    d = np.asarray(direction, dtype=float).reshape(-1)
    result = solve(LinearProgram(-d, poly.A, poly.b))
    if result.status is LpStatus.INFEASIBLE:
        raise EmptyPolytope("support function of an empty polytope")
    if result.status is LpStatus.UNBOUNDED:
        return np.inf
    return -result.value


def support_point(poly, direction):
    """Maximizer of d . x over the polytope (raises EmptyPolytope)."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    result = solve(LinearProgram(-d, poly.A, poly.b))
    if not result.optimal:
        raise EmptyPolytope(f"no maximizer in direction {d} ({result.status.value})")
    return result.x


def is_feasible(A, b):
    """True if {x : A x <= b} is nonempty."""
    A = np.asarray(A, dtype=float)
    result = solve(LinearProgram(np.zeros(A.shape[1]), A, b))
    return result.status is not LpStatus.INFEASIBLE


def distance_inf(poly, x):
    """
    Infinity-norm distance from x to the polytope.

    Solved as: minimize t subject to A w <= b and |w_i - x_i| <= t.

    Raises:
        EmptyPolytope: if the polytope is empty
    """
    A = np.asarray(poly.A, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    n = A.shape[1]
    eye = np.eye(n)
    ones = np.ones((n, 1))
    rows = np.vstack([
        np.hstack([A, np.zeros((A.shape[0], 1))]),
        np.hstack([eye, -ones]),
        np.hstack([-eye, -ones]),
    ])
    rhs = np.concatenate([poly.b, x, -x])
    objective = np.zeros(n + 1)
    objective[-1] = 1.0
    result = solve(LinearProgram(objective, rows, rhs))
    if not result.optimal:
        raise EmptyPolytope("distance to an empty polytope")
    return max(0.0, result.value)


def vertices(poly, tol=1e-9, max_dim=3):
    """
    Enumerate the vertices of a bounded polytope by facet intersection.

    Every choice of n rows is solved as an equality system; feasible,
    distinct solutions are the vertices.

    Args:
        poly: object with ``A`` and ``b``
        tol: feasibility and de-duplication tolerance
        max_dim: refuse dimensions above this bound

    Returns:
        np.ndarray: vertices, shape (V, n); (0, n) for an empty polytope
    """
    A = np.asarray(poly.A, dtype=float)
    b = np.asarray(poly.b, dtype=float)
    n = A.shape[1]
    if n > max_dim:
        raise DimensionTooLarge(f"vertex enumeration limited to n <= {max_dim}, got {n}")
    found = []
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        point = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ point <= b + tol * (1.0 + np.abs(b))):
            if not any(np.max(np.abs(point - q)) <= 1e3 * tol for q in found):
                found.append(point)
    if not found:
        return np.zeros((0, n))
    return np.array(sorted(found, key=tuple))
