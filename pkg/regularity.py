"""
Grid surrogates for regularity of a partially convex set.

A set is regular when every slice has nonempty interior and y -> K_y is
lower hemicontinuous. On a grid both become finite tests:

* interior: Chebyshev radius >= eps_int at every projected grid point;
* LHC / UHC: one-sided excess E(y -> y') = sup over samples x of K_y of
  dist_inf(x, K_{y'}) compared with tol_rate * ||y - y'|| + 1e-7 for
  neighboring grid points.

A large excess E(y -> y') means either that K_y is not approached from y'
(an LHC failure at y) or that K_{y'} suddenly shrinks when coming from y (a
UHC failure at y'). ``attribute_jumps`` decides between the two by looking
at all neighbors along the axis of the jump.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

import lp
from config import DEFAULT_EPS_INT, DEFAULT_TOL_RATE
from geometry import slice_samples

logger = logging.getLogger(__name__)

ABS_TOL = 1e-7


@dataclass(frozen=True)
class Jump:
    source: int
    target: int
    value: float
    witness: tuple = None


@dataclass(frozen=True)
class InteriorCheck:
    """
    Attributes:
        radii: Chebyshev radius per grid point (NaN where the slice is empty)
        ok: radius >= eps_int per grid point (True where the slice is empty)
        eps_int: threshold used
    """
    radii: np.ndarray
    ok: np.ndarray
    eps_int: float

    @property
    def all_ok(self):
        return bool(self.ok.all())


@dataclass(frozen=True)
class HemicontinuityCheck:
    """
    Attributes:
        ok: no failure attributed to this side
        witness: dict for the worst failure (y, y_prime, x, distance, tol) or None
        failures: all attributed failures as Jump records
    """
    ok: bool
    witness: dict
    failures: tuple


@dataclass(frozen=True)
class RegularityReport:
    interior: InteriorCheck
    lhc: HemicontinuityCheck
    uhc: HemicontinuityCheck
    verdict: str
    reason: str
    tol_rate: float
    eps_int: float

    @property
    def is_regular(self):
        return self.verdict == 'regular'


def check_interior(pc_set, eps_int=DEFAULT_EPS_INT):
    """Chebyshev radius test at every grid point of the projection."""
    radii = np.array([np.nan if s.is_empty else s.chebyshev_radius
                      for s in pc_set.grid_slices])
    ok = np.where(np.isnan(radii), True, radii >= eps_int)
    bad = np.flatnonzero(~ok)
    if bad.size:
        logger.info("interior check fails at %d grid points, first y=%s",
                    bad.size, pc_set.grid.points[bad[0]])
    return InteriorCheck(radii, ok.astype(bool), eps_int)


def slice_excess(source, target):
    """
    sup over samples of ``source`` of the inf-norm distance to ``target``.

    Returns:
        tuple: (distance, witness point); inf when only the target is empty
    """
    samples = slice_samples(source)
    if samples.shape[0] == 0:
        return 0.0, None
    if target.is_empty:
        return math.inf, tuple(samples[0])
    distances = np.array([lp.distance_inf(target, x) for x in samples])
    # ties go to the last sample (largest in the sorted vertex order)
    k = distances.size - 1 - int(np.argmax(distances[::-1]))
    return float(distances[k]), tuple(float(t) for t in samples[k])


def neighbor_excess(pc_set):
    """
    E(i -> j) for every ordered neighbor pair inside the projection.

    Returns:
        dict: (i, j) -> (distance, witness)
    """
    mask = pc_set.projection_mask
    slices = pc_set.grid_slices
    table = {}
    for i, j in pc_set.grid.neighbor_pairs():
        if not (mask[i] and mask[j]):
            continue
        table[(i, j)] = slice_excess(slices[i], slices[j])
        table[(j, i)] = slice_excess(slices[j], slices[i])
    return table


def attribute_jumps(groups, excess, tolerances):
    """
    Split neighbor jumps into LHC and UHC failures.

    A jump i -> j above tolerance is an LHC failure at i when i is a spike
    (its excess towards every neighbor along that axis is above tolerance),
    a UHC failure at j when j is a dip (every neighbor along the axis has
    excess into j above tolerance), and counts as both otherwise.

    Args:
        groups: output of BaseGrid.neighbor_groups()
        excess: dict (i, j) -> float
        tolerances: dict (i, j) -> float

    Returns:
        tuple: (lhc, uhc) lists of (i, j) pairs
    """
    def above(i, j):
        return (i, j) in excess and excess[(i, j)] > tolerances[(i, j)]

    axis_of = {}
    for i, axis, nbrs in groups:
        for j in nbrs:
            axis_of[(i, j)] = axis
    members = {(i, axis): [j for j in nbrs if (i, j) in excess] for i, axis, nbrs in groups}

    lhc, uhc = [], []
    for (i, j) in sorted(excess):
        if not above(i, j):
            continue
        axis = axis_of.get((i, j), 0)
        spike = all(above(i, k) for k in members.get((i, axis), [j]))
        dip = all(above(k, j) for k in members.get((j, axis), [i]))
        if spike:
            lhc.append((i, j))
        elif dip:
            uhc.append((i, j))
        else:
            lhc.append((i, j))
            uhc.append((i, j))
    return lhc, uhc


def _pair_tolerances(grid, pairs, tol_rate):
    return {(i, j): tol_rate * float(np.linalg.norm(grid.points[i] - grid.points[j])) + ABS_TOL
            for i, j in pairs}


def _summarize(pc_set, pairs, table, tolerances, side):
    if not pairs:
        return HemicontinuityCheck(True, None, ())
    failures = tuple(Jump(i, j, table[(i, j)][0], table[(i, j)][1]) for i, j in pairs)
    worst = max(failures, key=lambda f: f.value)
    points = pc_set.grid.points
    y, y_prime = (worst.source, worst.target) if side == 'lhc' else (worst.target, worst.source)
    witness = {
        'y': tuple(float(t) for t in points[y]),
        'y_prime': tuple(float(t) for t in points[y_prime]),
        'x': worst.witness,
        'distance': worst.value,
        'tol': tolerances[(worst.source, worst.target)],
    }
    return HemicontinuityCheck(False, witness, failures)


def _hemicontinuity(pc_set, tol_rate):
    table = neighbor_excess(pc_set)
    tolerances = _pair_tolerances(pc_set.grid, table.keys(), tol_rate)
    excess = {key: value[0] for key, value in table.items()}
    lhc, uhc = attribute_jumps(pc_set.grid.neighbor_groups(), excess, tolerances)
    return (_summarize(pc_set, lhc, table, tolerances, 'lhc'),
            _summarize(pc_set, uhc, table, tolerances, 'uhc'))


def check_lhc(pc_set, tol_rate=DEFAULT_TOL_RATE):
    """
    Lower hemicontinuity surrogate.

    The witness reports y (the slice that is not approached), y' (the
    neighbor), the sample x of K_y and its distance to K_{y'}.
    """
    return _hemicontinuity(pc_set, tol_rate)[0]


def check_uhc_bounded(pc_set, tol_rate=DEFAULT_TOL_RATE):
    """
    Upper hemicontinuity surrogate for bounded slices.

    The witness reports y (the slice that suddenly shrinks), y' (the
    neighbor whose sample x is far from K_y) and the distance.
    """
    return _hemicontinuity(pc_set, tol_rate)[1]


def check_regular(pc_set, tol_rate=DEFAULT_TOL_RATE, eps_int=DEFAULT_EPS_INT):
    """
    Aggregate interior, LHC and UHC checks into a verdict.

    not_regular (interior) if some projected slice has no interior;
    not_regular (lhc) if the worst LHC jump exceeds twice its tolerance;
    inconclusive if LHC fails only marginally; regular otherwise. UHC is
    reported but does not enter the verdict.
    """
    interior = check_interior(pc_set, eps_int)
    lhc, uhc = _hemicontinuity(pc_set, tol_rate)
    if not interior.all_ok:
        verdict, reason = 'not_regular', 'interior'
    elif not lhc.ok:
        if lhc.witness['distance'] <= 2.0 * lhc.witness['tol']:
            verdict, reason = 'inconclusive', 'lhc_marginal'
        else:
            verdict, reason = 'not_regular', 'lhc'
    else:
        verdict, reason = 'regular', None
    logger.info("%s: verdict %s (%s)", pc_set.name, verdict, reason)
    return RegularityReport(interior, lhc, uhc, verdict, reason, tol_rate, eps_int)
