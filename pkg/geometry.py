"""
Compact partially convex sets on a parameter grid.

A set K in R^(n+m) is stored as constraints that are affine in x with
polynomial coefficients in y,

    sum_j a_j(y) x_j <= b(y),

optionally extended by purely numeric rows attached to individual grid
points, and always intersected with the box |x_j| <= R. Every slice
K_y = {x : (x, y) in K} is therefore an H-polytope, which keeps slices,
membership and projection LP-tractable.

The parameter space is sampled by a ``BaseGrid``; suprema and minima over Y
become maxima and minima over grid points.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

import lp
from config import default_x_bound
from errors import GridNotTensor, YOutsideBox

logger = logging.getLogger(__name__)

BOX_TOL = 1e-12
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """
    Real polynomial in m variables.

    Attributes:
        num_vars: number of variables m
        terms: tuple of (exponent tuple of length m, coefficient); duplicate
            exponents are merged and zero coefficients dropped on construction
    """
    num_vars: int
    terms: tuple = ()

    def __post_init__(self):
        merged = {}
        for exps, coef in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.num_vars:
                raise ValueError(
                    f"exponent {exps} has length {len(exps)}, expected {self.num_vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coef = float(coef)
            if not math.isfinite(coef):
                raise ValueError(f"non-finite coefficient {coef}")
            merged[exps] = merged.get(exps, 0.0) + coef
        object.__setattr__(self, 'terms', tuple(
            (exps, coef) for exps, coef in sorted(merged.items()) if coef != 0.0))

    @classmethod
    def constant(cls, value, num_vars):
        return cls(num_vars, (((0,) * num_vars, value),))

    @classmethod
    def variable(cls, index, num_vars, coef=1.0):
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, ((tuple(exps), coef),))

    @classmethod
    def univariate(cls, coeffs):
        """Polynomial in one variable from ascending coefficients."""
        return cls(1, tuple(((k,), c) for k, c in enumerate(coeffs)))

    @property
    def degree(self):
        return max((sum(exps) for exps, _ in self.terms), default=0)

    def evaluate(self, y):
        """
        Evaluate at one point (shape (m,)) or many points (shape (N, m)).

        Returns:
            float for a single point, np.ndarray of shape (N,) otherwise
        """
        y = np.asarray(y, dtype=float)
        single = y.ndim <= 1
        pts = y.reshape(-1, self.num_vars) if self.num_vars else np.zeros((max(1, y.size), 0))
        total = np.zeros(pts.shape[0])
        for exps, coef in self.terms:
            total += coef * np.prod(pts ** np.asarray(exps, dtype=float), axis=1)
        return float(total[0]) if single else total

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other, self.num_vars)
        return MultiPoly(self.num_vars, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiPoly) else -float(other))

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            terms = [
                (tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
                for (e1, c1), (e2, c2) in itertools.product(self.terms, other.terms)
            ]
            return MultiPoly(self.num_vars, tuple(terms))
        return MultiPoly(self.num_vars, tuple((e, c * float(other)) for e, c in self.terms))

    __rmul__ = __mul__


def _covering_radius(box, points, axes):
    """Max distance from any box point to its nearest grid point."""
    if axes is not None:
        radii = []
        for (lo, hi), axis in zip(box, axes):
            gaps = np.diff(axis)
            radii.append(max(axis[0] - lo, hi - axis[-1],
                             gaps.max() / 2.0 if gaps.size else 0.0))
        radius = math.sqrt(sum(r * r for r in radii))
    else:
        m = len(box)
        per_axis = max(2, int(round(4096 ** (1.0 / m))))
        lattice = np.stack(np.meshgrid(
            *[np.linspace(lo, hi, per_axis) for lo, hi in box], indexing='ij'),
            axis=-1).reshape(-1, m)
        distances, _ = cKDTree(points).query(lattice)
        radius = float(distances.max())
    return max(radius, np.finfo(float).eps)


@dataclass(frozen=True, eq=False)
class BaseGrid:
    """
    Finite sample of the parameter box.

    Attributes:
        m: dimension of y
        box: tuple of (lo, hi) pairs
        points: grid points, shape (G, m); tensor grids are ordered with the
            last axis varying fastest
        axes: per-axis coordinates for tensor grids, None otherwise
        spacing: covering radius of the box by the points
    """
    m: int
    box: tuple
    points: np.ndarray
    axes: tuple = None
    spacing: float = field(default=None)

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if len(box) != self.m:
            raise ValueError(f"box has {len(box)} axes, expected {self.m}")
        if any(lo > hi for lo, hi in box):
            raise ValueError(f"box {box} has lo > hi")
        points = np.asarray(self.points, dtype=float).reshape(-1, self.m)
        if points.shape[0] == 0:
            raise ValueError("a grid needs at least one point")
        lows = np.array([lo for lo, _ in box])
        highs = np.array([hi for _, hi in box])
        if np.any(points < lows - BOX_TOL) or np.any(points > highs + BOX_TOL):
            raise ValueError("grid points must lie inside the box")
        if np.unique(np.round(points, 12), axis=0).shape[0] != points.shape[0]:
            raise ValueError("grid points must be pairwise distinct")
        object.__setattr__(self, 'box', box)
        object.__setattr__(self, 'points', points)
        if self.spacing is None:
            object.__setattr__(self, 'spacing', _covering_radius(box, points, self.axes))

    @classmethod
    def tensor(cls, box, points_per_axis):
        """Full tensor grid with ``points_per_axis`` points per axis (int or list)."""
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        counts = ([int(points_per_axis)] * len(box)
                  if np.isscalar(points_per_axis) else [int(k) for k in points_per_axis])
        axes = tuple(np.linspace(lo, hi, k) if hi > lo else np.array([lo])
                     for (lo, hi), k in zip(box, counts))
        mesh = np.meshgrid(*axes, indexing='ij')
        points = np.stack(mesh, axis=-1).reshape(-1, len(box))
        return cls(len(box), box, points, axes)

    @classmethod
    def from_points(cls, box, points):
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        return cls(len(box), box, np.asarray(points, dtype=float).reshape(-1, len(box)))

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def is_tensor(self):
        return self.axes is not None

    def contains(self, y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return bool(all(lo - BOX_TOL <= v <= hi + BOX_TOL for v, (lo, hi) in zip(y, self.box)))

    def index_of(self, y):
        """Index of the grid point equal to y, or None."""
        y = np.asarray(y, dtype=float).reshape(-1)
        hits = np.flatnonzero(np.all(np.abs(self.points - y) <= 1e-12 * (1.0 + np.abs(y)), axis=1))
        return int(hits[0]) if hits.size else None

    def nearest_index(self, y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return int(np.argmin(np.linalg.norm(self.points - y, axis=1)))

    def neighbor_groups(self):
        """
        Neighborhood structure used by the hemicontinuity surrogates.

        Returns:
            list of (index, axis, [neighbor indices]). Tensor grids give the
            previous/next point along each axis; explicit grids use a single
            group of points within 1.5x the nearest-neighbor distance.
        """
        groups = []
        if self.is_tensor:
            shape = tuple(len(a) for a in self.axes)
            for i in range(self.size):
                multi = np.unravel_index(i, shape)
                for axis in range(self.m):
                    nbrs = []
                    for step in (-1, 1):
                        pos = list(multi)
                        pos[axis] += step
                        if 0 <= pos[axis] < shape[axis]:
                            nbrs.append(int(np.ravel_multi_index(pos, shape)))
                    if nbrs:
                        groups.append((i, axis, nbrs))
            return groups
        if self.size < 2:
            return groups
        tree = cKDTree(self.points)
        nearest, _ = tree.query(self.points, k=2)
        for i in range(self.size):
            radius = 1.5 * nearest[i, 1] * (1 + 1e-9)
            nbrs = sorted(j for j in tree.query_ball_point(self.points[i], radius) if j != i)
            groups.append((i, 0, nbrs))
        return groups

    def neighbor_pairs(self):
        """Sorted list of unordered neighbor index pairs."""
        pairs = set()
        for i, _, nbrs in self.neighbor_groups():
            for j in nbrs:
                pairs.add((min(i, j), max(i, j)))
        return sorted(pairs)

    def refined(self):
        """Tensor grid with every cell split in two (2k - 1 points per axis)."""
        if not self.is_tensor:
            raise GridNotTensor("only tensor grids can be refined")
        return BaseGrid.tensor(self.box, [2 * len(a) - 1 for a in self.axes])

    def subgrid(self, indices):
        """Explicit grid of the selected points (same box)."""
        indices = list(indices)
        if len(indices) == self.size:
            return self
        return BaseGrid.from_points(self.box, self.points[indices])


@dataclass(frozen=True, eq=False)
class ConstraintRow:
    """sum_j a[j](y) x_j <= b(y)."""
    a: tuple
    b: MultiPoly


@dataclass(frozen=True, eq=False)
class SlicePolytope:
    """
    H-polytope {x : A x <= b} in R^n with lazily computed Chebyshev data.
    """
    n: int
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(-1, self.n)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise ValueError("row count mismatch between A and b")
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)

    @cached_property
    def _ball(self):
        return lp.chebyshev(self)

    @property
    def is_empty(self):
        return self._ball is None

    @property
    def chebyshev_center(self):
        return None if self._ball is None else self._ball[0]

    @property
    def chebyshev_radius(self):
        return None if self._ball is None else self._ball[1]

    @cached_property
    def vertices(self):
        if self.is_empty:
            return np.zeros((0, self.n))
        return lp.vertices(self)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float).reshape(-1)
        return bool(np.all(self.A @ x <= self.b + tol))

    def support(self, direction):
        return lp.support(self, direction)


def box_rows(n, radius):
    """Rows of |x_j| <= radius."""
    eye = np.eye(n)
    return np.vstack([eye, -eye]), np.full(2 * n, float(radius))


@dataclass(frozen=True, eq=False)
class PartiallyConvexSet:
    """
    Compact set whose slices are H-polytopes.

    Attributes:
        n: dimension of x
        grid: BaseGrid sampling the parameter box
        constraints: tuple of ConstraintRow (polynomial rows)
        x_bound: radius R of the enforced box |x_j| <= R
        numeric_constraints: {grid index: (A, b)} rows that only hold at that
            grid point; off-grid slices use the rows of the nearest grid point
        name: label used in reports
    """
    n: int
    grid: BaseGrid
    constraints: tuple = ()
    x_bound: float = field(default_factory=default_x_bound)
    numeric_constraints: dict = field(default_factory=dict)
    name: str = 'set'

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.x_bound <= 0:
            raise ValueError("x_bound must be positive")
        for row in self.constraints:
            if len(row.a) != self.n:
                raise ValueError(f"constraint row has {len(row.a)} x-coefficients, expected {self.n}")
            for poly in (*row.a, row.b):
                if poly.num_vars != self.grid.m:
                    raise ValueError("constraint polynomials must be in m variables")
        numeric = {}
        for idx, (A, b) in self.numeric_constraints.items():
            idx = int(idx)
            if not 0 <= idx < self.grid.size:
                raise ValueError(f"numeric constraints reference grid index {idx}")
            A = np.asarray(A, dtype=float).reshape(-1, self.n)
            b = np.asarray(b, dtype=float).reshape(-1)
            if A.shape[0] != b.size:
                raise ValueError(f"numeric rows at index {idx}: row count mismatch")
            numeric[idx] = (A, b)
        object.__setattr__(self, 'constraints', tuple(self.constraints))
        object.__setattr__(self, 'numeric_constraints', numeric)

    @property
    def m(self):
        return self.grid.m

    def rows_at(self, y, index=None):
        """
        All rows of the slice system at y (polynomial, numeric and box rows).

        Returns:
            tuple: (A, b) arrays
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        blocks_a, blocks_b = [], []
        if self.constraints:
            blocks_a.append(np.array([[p.evaluate(y) for p in row.a] for row in self.constraints]))
            blocks_b.append(np.array([row.b.evaluate(y) for row in self.constraints]))
        if self.numeric_constraints:
            if index is None:
                index = self.grid.index_of(y)
            if index is None:
                index = self.grid.nearest_index(y)
            if index in self.numeric_constraints:
                A, b = self.numeric_constraints[index]
                blocks_a.append(A)
                blocks_b.append(b)
        A_box, b_box = box_rows(self.n, self.x_bound)
        blocks_a.append(A_box)
        blocks_b.append(b_box)
        return np.vstack(blocks_a), np.concatenate(blocks_b)

    @cached_property
    def grid_slices(self):
        """SlicePolytope for every grid point, in grid order."""
        return tuple(SlicePolytope(self.n, *self.rows_at(y, index=i))
                     for i, y in enumerate(self.grid.points))

    @cached_property
    def projection_mask(self):
        """Boolean mask of grid points whose slice is nonempty."""
        return np.array([not s.is_empty for s in self.grid_slices])


def slice_at(pc_set, y):
    """
    The slice K_y as an H-polytope intersected with the x-box.

    Raises:
        YOutsideBox: if y is not inside the grid box
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if not pc_set.grid.contains(y):
        raise YOutsideBox(y, pc_set.grid.box)
    index = pc_set.grid.index_of(y)
    if index is not None:
        return pc_set.grid_slices[index]
    return SlicePolytope(pc_set.n, *pc_set.rows_at(y))


def membership(pc_set, x, y, tol=MEMBERSHIP_TOL):
    """True iff y is in the box and x satisfies every row at y."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if not pc_set.grid.contains(y):
        return False
    A, b = pc_set.rows_at(y)
    x = np.asarray(x, dtype=float).reshape(-1)
    return bool(np.all(A @ x <= b + tol))


def project_y(pc_set):
    """Grid points with a nonempty slice, shape (P, m)."""
    return pc_set.grid.points[pc_set.projection_mask]


def slice_samples(poly):
    """
    Finite samples of a slice used by every validator.

    Vertices (n <= 3) or axis support points (n > 3), plus the Chebyshev
    center. Empty slices give an empty array.
    """
    if poly.is_empty:
        return np.zeros((0, poly.n))
    if poly.n <= 3:
        pts = [poly.vertices]
    else:
        eye = np.eye(poly.n)
        pts = [np.array([lp.support_point(poly, d) for d in np.vstack([eye, -eye])])]
    pts.append(poly.chebyshev_center.reshape(1, -1))
    return np.vstack(pts)


def hausdorff_directions(n):
    """2n axis directions and 2^n normalized diagonals."""
    eye = np.eye(n)
    diagonals = np.array(list(itertools.product((-1.0, 1.0), repeat=n))) / math.sqrt(n)
    return np.vstack([eye, -eye, diagonals])


def slice_hausdorff(P, Q, directions=None):
    """
    Support-function Hausdorff estimate max_d |h_P(d) - h_Q(d)|.

    Exact for intervals; for n > 1 it is evaluated on the axis and diagonal
    directions. Two empty slices are at distance 0, one empty slice at inf.
    """
    if P.is_empty or Q.is_empty:
        return 0.0 if P.is_empty and Q.is_empty else math.inf
    if directions is None:
        directions = hausdorff_directions(P.n)
    return max(abs(P.support(d) - Q.support(d)) for d in directions)


def affine_image(pc_set, maps, name=None):
    """
    Image of a set under slice-wise affine maps x -> T_y x + t_y.

    Args:
        pc_set: PartiallyConvexSet
        maps: list aligned with the grid of (T, t), T invertible (n x n)

    Returns:
        PartiallyConvexSet on the same grid with numeric rows only
    """
    if len(maps) != pc_set.grid.size:
        raise ValueError("one affine map per grid point is required")
    numeric = {}
    reach = 0.0
    for i, (T, t) in enumerate(maps):
        T = np.asarray(T, dtype=float).reshape(pc_set.n, pc_set.n)
        t = np.asarray(t, dtype=float).reshape(-1)
        T_inv = np.linalg.inv(T)
        A, b = pc_set.rows_at(pc_set.grid.points[i], index=i)
        numeric[i] = (A @ T_inv, b + A @ T_inv @ t)
        reach = max(reach, np.abs(T).sum(axis=1).max() * pc_set.x_bound + np.abs(t).max())
    return PartiallyConvexSet(pc_set.n, pc_set.grid, (), reach * 1.01 + 1.0, numeric,
                              name or f'{pc_set.name}-image')


@dataclass(frozen=True)
class IsomorphismReport:
    distance: float
    profile: tuple
    passed: bool


def check_isomorphism(first, second, maps, tol=1e-7):
    """
    Check that slice-wise affine maps carry one set onto another.

    The parameter map is the identity on a shared grid, so the check is
    Hausdorff(T_y K_y + t_y, L_y) <= tol at every grid point.
    """
    if first.grid.size != second.grid.size or not np.allclose(first.grid.points,
                                                             second.grid.points):
        raise ValueError("isomorphism check needs both sets on the same grid")
    image = affine_image(first, maps)
    profile = tuple(slice_hausdorff(P, Q) for P, Q in zip(image.grid_slices,
                                                          second.grid_slices))
    distance = max(profile)
    return IsomorphismReport(distance, profile, distance <= tol)


# ---------------------------------------------------------------------------
# builtin sets
# ---------------------------------------------------------------------------

def fig1_radius(y):
    """Half-width r(y) = sqrt((y^2 + 1) / 2) of the hyperbola set."""
    return np.sqrt((np.asarray(y, dtype=float) ** 2 + 1.0) / 2.0)


def _interval_rows(lo, hi):
    return np.array([[1.0], [-1.0]]), np.array([hi, -lo])


def fig1(points_per_axis=21):
    """
    Set bounded by y = +-1 and the hyperbola 2x^2 = y^2 + 1.

    Entered with numeric rows x <= r(y_k), -x <= r(y_k) at each grid point.
    """
    grid = BaseGrid.tensor([(-1.0, 1.0)], points_per_axis)
    numeric = {}
    for i, (y,) in enumerate(grid.points):
        r = float(fig1_radius(y))
        numeric[i] = _interval_rows(-r, r)
    return PartiallyConvexSet(1, grid, (), default_x_bound(), numeric, 'fig1')


def triangle(points_per_axis=21):
    """{y in [0, 1], |x| <= y}: closed and partially convex but not regular."""
    grid = BaseGrid.tensor([(0.0, 1.0)], points_per_axis)
    y = MultiPoly.variable(0, 1)
    rows = (ConstraintRow((MultiPoly.constant(1.0, 1),), y),
            ConstraintRow((MultiPoly.constant(-1.0, 1),), y))
    return PartiallyConvexSet(1, grid, rows, default_x_bound(), {}, 'triangle')


def l_set(points_per_axis=21, half_width=0.8):
    """Constant slices [-0.8, 0.8] over y in [0, 1]; regular."""
    grid = BaseGrid.tensor([(0.0, 1.0)], points_per_axis)
    c = MultiPoly.constant(half_width, 1)
    rows = (ConstraintRow((MultiPoly.constant(1.0, 1),), c),
            ConstraintRow((MultiPoly.constant(-1.0, 1),), c))
    return PartiallyConvexSet(1, grid, rows, default_x_bound(), {}, 'L_set')


def m_set(points_per_axis=41):
    """Slice [-2, 2] at y = 0 and [-1, 1] for y > 0; not lower hemicontinuous."""
    grid = BaseGrid.tensor([(0.0, 1.0)], points_per_axis)
    numeric = {i: _interval_rows(-2.0, 2.0) if y == 0.0 else _interval_rows(-1.0, 1.0)
               for i, (y,) in enumerate(grid.points)}
    return PartiallyConvexSet(1, grid, (), default_x_bound(), numeric, 'M_set')


def unit_box(n=1, m=1, points_per_axis=None, y_range=(-1.0, 1.0)):
    """[-1, 1]^n x y_range^m (default [-1, 1]^m)."""
    if points_per_axis is None:
        points_per_axis = 21 if m == 1 else 11
    grid = BaseGrid.tensor([tuple(y_range)] * m, points_per_axis)
    one = MultiPoly.constant(1.0, m)
    rows = []
    for j in range(n):
        for sign in (1.0, -1.0):
            a = tuple(MultiPoly.constant(sign if k == j else 0.0, m) for k in range(n))
            rows.append(ConstraintRow(a, one))
    return PartiallyConvexSet(n, grid, tuple(rows), default_x_bound(), {}, f'unit_box({n},{m})')


def exp_truncated(points_per_axis=21, x_bound=10.0):
    """
    {x >= -exp(y^2)} restricted to y in [-1, 1] and |x| <= x_bound.

    The untruncated set is closed and partially convex but unbounded, and no
    partially affine polynomial separates (-2, 0) from it: nonnegativity for
    large x forces the x-coefficient v(y) >= 0, and then the constant term
    would have to dominate v(y) exp(y^2), which no polynomial does. The
    truncation is compact, so separation succeeds on it.
    """
    grid = BaseGrid.tensor([(-1.0, 1.0)], points_per_axis)
    numeric = {i: (np.array([[-1.0]]), np.array([math.exp(y * y)]))
               for i, (y,) in enumerate(grid.points)}
    return PartiallyConvexSet(1, grid, (), x_bound, numeric, 'exp_truncated')


BUILTIN_SETS = {
    'fig1': fig1,
    'triangle': triangle,
    'L_set': l_set,
    'M_set': m_set,
    'unit_box': unit_box,
    'exp_truncated': exp_truncated,
}


def builtin_sets():
    """Named constructors of the worked example sets."""
    return dict(BUILTIN_SETS)
