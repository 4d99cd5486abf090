"""
Free order unit modules over a grid and their partially convex state spaces.

A module of type (n, m) is modeled fiber by fiber: at every grid point y the
fiber is coefficient space R^(n+1) (basis [e_0]_y = u, [e_1]_y, ...,
[e_n]_y) ordered by a finitely generated cone. Elements are coefficient
vectors sampled on the grid.

``module_from_set`` sends a regular set K to the module of continuous
partially affine functions on K (fiber cone = affine functions nonnegative
on K_y); ``state_space`` goes back by collecting the coordinates of the
y-states. ``roundtrip_distance`` measures how far the composition is from
the identity.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

import lp
from config import DEFAULT_EPS_INT, DEFAULT_SEED, DEFAULT_TOL_RATE
from errors import ConeNotPointed, DimensionTooLarge, InputError, NotRegular
from geometry import (
    PartiallyConvexSet, SlicePolytope, box_rows, hausdorff_directions, slice_at,
    slice_hausdorff,
)
from regularity import ABS_TOL, attribute_jumps, check_regular

logger = logging.getLogger(__name__)

MAX_CONE_DIM = 3
CONE_TOL = 1e-9


def dualize_cone(rays, tol=CONE_TOL):
    """
    Extreme rays of the dual cone {c : <c, w> >= 0 for every ray w}.

    Facet enumeration: every d - 1 linearly independent rays span a
    candidate hyperplane; its normal is kept when all rays lie on one side.
    Generators are scaled to max-abs 1 and de-duplicated.

    Args:
        rays: generators of the primal cone, shape (R, d)

    Returns:
        np.ndarray: shape (K, d), sorted

    Raises:
        DimensionTooLarge: if d - 1 > 3
    """
    rays = np.asarray(rays, dtype=float)
    d = rays.shape[1]
    if d - 1 > MAX_CONE_DIM:
        raise DimensionTooLarge(f"cone dualization limited to n <= {MAX_CONE_DIM}, got {d - 1}")
    found = []
    for subset in itertools.combinations(range(rays.shape[0]), d - 1):
        sub = rays[list(subset)]
        _, sing, vt = np.linalg.svd(sub)
        if sing.size < d - 1 or sing[-1] < 1e-10:
            continue
        normal = vt[-1]
        values = rays @ normal
        if np.all(values >= -tol):
            pass
        elif np.all(values <= tol):
            normal = -normal
        else:
            continue
        # rounded so SVD noise cannot reorder the sorted output; + 0.0 drops -0.0
        normal = np.round(normal / np.abs(normal).max(), 12) + 0.0
        if not any(np.allclose(normal, g, atol=1e-9) for g in found):
            found.append(normal)
    if not found:
        return np.zeros((0, d))
    return np.array(sorted(found, key=tuple))


def lift(points):
    """(1, v) for every point v."""
    points = np.asarray(points, dtype=float)
    return np.hstack([np.ones((points.shape[0], 1)), points])


@dataclass(frozen=True, eq=False)
class FiberCone:
    """
    Finitely generated cone in R^(n+1) with order unit u = (1, 0, ..., 0).

    Attributes:
        n: dimension of x
        generators: shape (K, n+1)
    """
    n: int
    generators: np.ndarray

    def __post_init__(self):
        gens = np.asarray(self.generators, dtype=float).reshape(-1, self.n + 1)
        object.__setattr__(self, 'generators', gens)

    @property
    def unit(self):
        u = np.zeros(self.n + 1)
        u[0] = 1.0
        return u

    @cached_property
    def dual_rays(self):
        """Generators of the dual cone (the affine evaluations at vertices)."""
        return dualize_cone(self.generators)

    def contains(self, vector, tol=CONE_TOL):
        """LP feasibility of G^T mu = vector, mu >= 0."""
        vector = np.asarray(vector, dtype=float).reshape(-1)
        gens = self.generators
        k = gens.shape[0]
        if k == 0:
            return bool(np.all(np.abs(vector) <= tol))
        rows = np.vstack([gens.T, -gens.T, -np.eye(k)])
        rhs = np.concatenate([vector + tol, -vector + tol, np.zeros(k)])
        return lp.is_feasible(rows, rhs)

    def fast_norm(self, vectors):
        """
        Order unit norm max_w |<w, a>| / <w, u> over dual rays, vectorized.

        Returns inf when u is not interior (some dual ray has <w, u> <= 0).
        """
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        rays = self.dual_rays
        if rays.shape[0] == 0 or np.any(rays[:, 0] <= CONE_TOL):
            return np.full(vectors.shape[0], np.inf)
        return np.max(np.abs(vectors @ rays.T) / rays[:, 0], axis=1)


@dataclass(frozen=True, eq=False)
class FreeOrderUnitModule:
    """
    Attributes:
        n, m: type of the module
        grid: BaseGrid of base points
        fibers: tuple of FiberCone, one per grid point
        x_bound: box radius used for state-space slices
        name: label used in reports
    """
    n: int
    m: int
    grid: object
    fibers: tuple
    x_bound: float = 10.0
    name: str = 'module'

    def __post_init__(self):
        fibers = tuple(self.fibers)
        if len(fibers) != self.grid.size:
            raise ValueError(f"{len(fibers)} fibers for {self.grid.size} grid points")
        if any(f.n != self.n for f in fibers):
            raise ValueError("every fiber must have the same n")
        if self.grid.m != self.m:
            raise ValueError("grid dimension does not match m")
        object.__setattr__(self, 'fibers', fibers)

    def index_of(self, y):
        if isinstance(y, (int, np.integer)):
            return int(y)
        index = self.grid.index_of(y)
        if index is None:
            raise InputError(f"y={tuple(np.ravel(y))} is not a grid point of the module")
        return index


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """
    Element sum_i c_i [e_i] with coefficients sampled on the grid.

    Attributes:
        values: shape (G, n+1)
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(values)):
            raise ValueError("module element coefficients must be finite")
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, grid, vector):
        vector = np.asarray(vector, dtype=float).reshape(1, -1)
        return cls(np.repeat(vector, grid.size, axis=0))

    @classmethod
    def from_polys(cls, grid, polys):
        """Coefficients given as MultiPoly c_0, ..., c_n."""
        return cls(np.column_stack([p.evaluate(grid.points) for p in polys]))

    @classmethod
    def unit(cls, grid, n):
        vector = np.zeros(n + 1)
        vector[0] = 1.0
        return cls.constant(grid, vector)

    def at(self, index):
        return self.values[index]


def module_from_set(pc_set, tol_rate=DEFAULT_TOL_RATE, eps_int=DEFAULT_EPS_INT, report=None):
    """
    Module of continuous partially affine functions on a regular set.

    The base grid is the projection of K. The fiber cone at y is generated
    by the extreme affine functions nonnegative on K_y, obtained by
    dualizing the lifted vertices (1, v).

    Raises:
        DimensionTooLarge: if n > 3
        NotRegular: if the set fails check_regular
    """
    if pc_set.n > MAX_CONE_DIM:
        raise DimensionTooLarge(f"module construction limited to n <= {MAX_CONE_DIM}")
    if report is None:
        report = check_regular(pc_set, tol_rate, eps_int)
    if not report.is_regular:
        raise NotRegular(report)
    mask = pc_set.projection_mask
    grid = pc_set.grid if mask.all() else pc_set.grid.subgrid(np.flatnonzero(mask))
    fibers = tuple(FiberCone(pc_set.n, dualize_cone(lift(pc_set.grid_slices[i].vertices)))
                   for i in np.flatnonzero(mask))
    logger.info("module of %s: %d fibers", pc_set.name, len(fibers))
    return FreeOrderUnitModule(pc_set.n, pc_set.m, grid, fibers, pc_set.x_bound,
                               f'Caff({pc_set.name})')


def fiber_norm(mod, a, y):
    """
    ||[a]_y|| = min lambda with lambda u - a and lambda u + a in the fiber cone.

    Returns inf (with a warning) when no lambda works, which happens when the
    unit is not an interior point of the cone.

    Raises:
        ConeNotPointed: if the LP is unbounded below
    """
    index = mod.index_of(y)
    fiber = mod.fibers[index]
    coeffs = a.at(index)
    gens = fiber.generators
    d, k = mod.n + 1, gens.shape[0]
    u = fiber.unit[:, None]
    zeros = np.zeros((d, k))
    plus = np.hstack([u, -gens.T, zeros])
    minus = np.hstack([u, zeros, -gens.T])
    rows = np.vstack([plus, -plus, minus, -minus,
                      np.hstack([np.zeros((2 * k, 1)), -np.eye(2 * k)])])
    rhs = np.concatenate([coeffs, -coeffs, -coeffs, coeffs, np.zeros(2 * k)])
    objective = np.zeros(1 + 2 * k)
    objective[0] = 1.0
    result = lp.solve(lp.LinearProgram(objective, rows, rhs))
    if result.status is lp.LpStatus.UNBOUNDED:
        raise ConeNotPointed(f"fiber cone at grid point {index} contains a line")
    if result.status is lp.LpStatus.INFEASIBLE:
        logger.warning("fiber norm infeasible at grid point %d; unit is not interior", index)
        return math.inf
    return max(0.0, result.value)


@dataclass(frozen=True)
class NormProfile:
    value: float
    profile: np.ndarray


def global_norm(mod, a):
    """Max of the fiber norms, with the per-point profile."""
    profile = np.array([fiber_norm(mod, a, i) for i in range(mod.grid.size)])
    return NormProfile(float(profile.max()), profile)


def is_positive(mod, a, tol=CONE_TOL):
    """True iff [a]_y lies in the fiber cone at every grid point."""
    return all(fiber.contains(a.at(i), tol) for i, fiber in enumerate(mod.fibers))


def state_space_slice(mod, y):
    """
    Coordinates of the y-states: {x : g_0 + <g_x, x> >= 0 for every generator g}
    intersected with the box |x_j| <= R.
    """
    fiber = mod.fibers[mod.index_of(y)]
    gens = fiber.generators
    A_box, b_box = box_rows(mod.n, mod.x_bound)
    A = np.vstack([-gens[:, 1:], A_box])
    b = np.concatenate([gens[:, 0], b_box])
    return SlicePolytope(mod.n, A, b)


def state_space_with_report(mod, tol_rate=DEFAULT_TOL_RATE, eps_int=DEFAULT_EPS_INT):
    """
    The partially convex coordinate state space as a set with numeric rows,
    together with its RegularityReport.

    A warning is logged when the result does not pass check_regular.
    """
    numeric = {i: (-fiber.generators[:, 1:], fiber.generators[:, 0])
               for i, fiber in enumerate(mod.fibers)}
    recovered = PartiallyConvexSet(mod.n, mod.grid, (), mod.x_bound, numeric,
                                   f'state_space({mod.name})')
    report = check_regular(recovered, tol_rate, eps_int)
    if not report.is_regular:
        logger.warning("state space of %s is %s (%s)", mod.name, report.verdict, report.reason)
    return recovered, report


def state_space(mod, tol_rate=DEFAULT_TOL_RATE, eps_int=DEFAULT_EPS_INT):
    """The coordinate state space of a module; see state_space_with_report."""
    return state_space_with_report(mod, tol_rate, eps_int)[0]


@dataclass(frozen=True)
class RoundTripReport:
    distance: float
    profile: np.ndarray
    points: np.ndarray

    def passed(self, eps_rt):
        return self.distance <= eps_rt


def roundtrip_distance(pc_set, tol_rate=DEFAULT_TOL_RATE, eps_int=DEFAULT_EPS_INT):
    """
    Max slice Hausdorff distance between K and state_space(module_from_set(K)).

    Raises:
        NotRegular: if the set is not regular
    """
    mod = module_from_set(pc_set, tol_rate, eps_int)
    recovered = state_space(mod, tol_rate, eps_int)
    profile = np.array([
        slice_hausdorff(slice_at(pc_set, y), recovered.grid_slices[i])
        for i, y in enumerate(mod.grid.points)
    ])
    return RoundTripReport(float(profile.max()), profile, mod.grid.points)


def module_action(mod, g, a):
    """
    C(Y)-module action: multiply every coefficient by g(y).

    Args:
        g: per-grid values (shape (G,)) or a MultiPoly in y
    """
    if hasattr(g, 'evaluate'):
        g = g.evaluate(mod.grid.points)
    g = np.asarray(g, dtype=float).reshape(-1, 1)
    return ModuleElement(a.values * g)


def evaluate_state(mod, y, x, a):
    """
    psi(a) = c_0(y) + sum_i c_i(y) x_i for the y-state with coordinates x.

    Raises:
        InputError: if x is not in the state-space slice at y
    """
    index = mod.index_of(y)
    x = np.asarray(x, dtype=float).reshape(-1)
    if not state_space_slice(mod, index).contains(x):
        raise InputError(f"x={tuple(x)} is not a state coordinate at grid point {index}")
    coeffs = a.at(index)
    return float(coeffs[0] + coeffs[1:] @ x)


def check_fiber_isomorphism(first, second, T, tol=CONE_TOL):
    """
    Unital order isomorphism test: T u = u, T maps the first cone into the
    second and T^-1 maps the second into the first.
    """
    T = np.asarray(T, dtype=float)
    if not np.allclose(T @ first.unit, second.unit, atol=tol):
        return False
    T_inv = np.linalg.inv(T)
    return (all(second.contains(T @ g, tol) for g in first.generators)
            and all(first.contains(T_inv @ g, tol) for g in second.generators))


def section_support(fiber, direction):
    """Support function of the section C cap [-1, 1]^(n+1)."""
    gens = fiber.generators
    k = gens.shape[0]
    rows = np.vstack([gens.T, -gens.T, -np.eye(k)])
    rhs = np.concatenate([np.ones(gens.shape[1]), np.ones(gens.shape[1]), np.zeros(k)])
    result = lp.solve(lp.LinearProgram(-(gens @ direction), rows, rhs))
    return -result.value if result.optimal else math.inf


@dataclass(frozen=True)
class AxiomCheck:
    passed: bool
    detail: dict


@dataclass(frozen=True)
class AxiomReport:
    checks: dict
    norm_constants: tuple

    @property
    def passed(self):
        return all(check.passed for check in self.checks.values())


def _unit_interior(mod, eps):
    failing = []
    for i, fiber in enumerate(mod.fibers):
        u = fiber.unit
        for j in range(1, mod.n + 1):
            step = np.zeros(mod.n + 1)
            step[j] = eps
            if not (fiber.contains(u + step) and fiber.contains(u - step)):
                failing.append(i)
                break
    return AxiomCheck(not failing, {'failing_points': failing, 'eps': eps})


def _pointed(mod):
    failing = []
    for i, fiber in enumerate(mod.fibers):
        gens = fiber.generators
        k = gens.shape[0]
        # a convex combination of generators equal to 0 means a line in the cone
        rows = np.vstack([gens.T, -gens.T, np.ones((1, k)), -np.ones((1, k)), -np.eye(k)])
        rhs = np.concatenate([np.full(2 * gens.shape[1], CONE_TOL), [1.0, -1.0], np.zeros(k)])
        if lp.is_feasible(rows, rhs):
            failing.append(i)
    return AxiomCheck(not failing, {'failing_points': failing})


def check_module_axioms(mod, rate=DEFAULT_TOL_RATE, samples=1000, seed=DEFAULT_SEED, eps=1e-3):
    """
    Numeric surrogates of the module axioms on the grid.

    Checks: full rank fibers, unit interior (u +- eps e_i in the cone),
    pointed cones, closed total cone (neighbor section Hausdorff within
    rate * h), cone LHC / UHC via attributed section jumps, and norm
    equivalence m ||c||_2 <= ||c|| <= M ||c||_2 on random unit vectors.

    Returns:
        AxiomReport
    """
    checks = {}
    low_rank = [i for i, f in enumerate(mod.fibers)
                if f.generators.shape[0] == 0
                or np.linalg.matrix_rank(f.generators) < mod.n + 1]
    checks['full_rank'] = AxiomCheck(not low_rank, {'failing_points': low_rank})
    checks['unit_interior'] = _unit_interior(mod, eps)
    checks['pointed'] = _pointed(mod)

    directions = hausdorff_directions(mod.n + 1)
    supports = np.array([[section_support(f, d) for d in directions] for f in mod.fibers])
    pairs = mod.grid.neighbor_pairs()
    tolerances, excess = {}, {}
    worst_gap = 0.0
    closed_failures = []
    for i, j in pairs:
        tol = rate * float(np.linalg.norm(mod.grid.points[i] - mod.grid.points[j])) + ABS_TOL
        tolerances[(i, j)] = tolerances[(j, i)] = tol
        excess[(i, j)] = float(np.max(supports[i] - supports[j]))
        excess[(j, i)] = float(np.max(supports[j] - supports[i]))
        gap = max(excess[(i, j)], excess[(j, i)])
        worst_gap = max(worst_gap, gap)
        if gap > tol:
            closed_failures.append((i, j))
    checks['closed_total_cone'] = AxiomCheck(
        not closed_failures, {'worst_gap': worst_gap, 'failing_pairs': closed_failures})
    lhc, uhc = attribute_jumps(mod.grid.neighbor_groups(), excess, tolerances)
    checks['lhc'] = AxiomCheck(not lhc, {'failing_pairs': lhc})
    checks['uhc'] = AxiomCheck(not uhc, {'failing_pairs': uhc})

    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((samples, mod.n + 1))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    ratios = np.concatenate([f.fast_norm(vectors) for f in mod.fibers])
    low, high = float(ratios.min()), float(ratios.max())
    checks['norm_equivalence'] = AxiomCheck(
        low > 0 and math.isfinite(high), {'m': low, 'M': high, 'samples': samples})
    for name, check in checks.items():
        if not check.passed:
            logger.warning("%s: axiom surrogate %s fails (%s)", mod.name, name, check.detail)
    return AxiomReport(checks, (low, high))
