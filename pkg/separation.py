"""
Separation certificates for points outside a compact partially convex set.

Two constructions are provided:

* ``separate_polynomial``: a partially affine polynomial
  p(x, y) = <v, x> + c + M ||y - y_z||^2 (slice of z nonempty) or
  p(x, y) = -1 + M ||y - y_z||^2 (slice of z empty) with p >= 0 on K and
  p(z) < 0.
* ``separate_continuous``: f(x, y) = <v, x> + c + mu(y) where mu is the
  negative part of the minimum value function m(y) = min over K_y of
  <v, x> + c, so f is continuous and partially affine but in general not a
  polynomial.

Both are checked exactly on every grid slice by ``validate_certificate``
(one support LP per slice), not only on sample points.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

import lp
from config import DEFAULT_TOL
from errors import BigMSearchFailed, PointInsideSet
from geometry import MEMBERSHIP_TOL, MultiPoly, project_y, slice_at
from paff import PAffPolynomial

logger = logging.getLogger(__name__)

MARGIN_FRACTION = 0.2
M_MAX = 1e8


class Branch(str, Enum):
    SLICE_NONEMPTY = 'SliceNonempty'
    SLICE_EMPTY = 'SliceEmpty'


@dataclass(frozen=True)
class ValidationReport:
    """
    Result of checking a separator against a set.

    Attributes:
        min_on_K: minimum of the separator over all grid slices
        argmin: (x, y) where the minimum is attained, or None if K is empty
        value_at_z: separator value at the separated point
        tol: tolerance used for the nonnegativity test
        passed: min_on_K >= -tol and value_at_z < 0
    """
    min_on_K: float
    argmin: tuple
    value_at_z: float
    tol: float
    passed: bool


@dataclass(frozen=True, eq=False)
class SeparationCertificate:
    """
    Separating partially affine polynomial.

    SliceNonempty: p(x, y) = <v, x> + c + M ||y - y_z||^2
    SliceEmpty:    p(x, y) = -1 + M ||y - y_z||^2   (v = 0, c = -1)
    """
    branch: Branch
    v: np.ndarray
    c: float
    M: float
    y_z: np.ndarray
    delta: float = 0.0
    gamma: float = None
    validation: ValidationReport = None

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        return float(self.v @ x + self.c + self.M * np.sum((y - self.y_z) ** 2))

    def to_paff(self):
        """The certificate as a PAffPolynomial."""
        m = self.y_z.size
        c0 = MultiPoly.constant(self.c, m)
        for k, center in enumerate(self.y_z):
            shifted = MultiPoly.variable(k, m) - float(center)
            c0 = c0 + self.M * (shifted * shifted)
        coeffs = (c0,) + tuple(MultiPoly.constant(vi, m) for vi in self.v)
        return PAffPolynomial(self.v.size, m, coeffs)


@dataclass(frozen=True, eq=False)
class ContinuousSeparator:
    """
    f(x, y) = <v, x> + c + mu(y), with mu stored on the grid.

    kind 'correction': mu = max(0, -m) with mu(y_z) = 0.
    kind 'distance': the slice of z is empty; v = 0, c = -d^2 / 2 and
    mu(y) = ||y - y_z||^2 where d is the distance from y_z to the projection.
    """
    kind: str
    v: np.ndarray
    c: float
    mu: np.ndarray
    y_z: np.ndarray
    delta: float = 0.0
    min_values: np.ndarray = field(default=None)
    validation: ValidationReport = None

    def mu_at(self, y, index=None):
        y = np.asarray(y, dtype=float).reshape(-1)
        if self.kind == 'distance':
            return float(np.sum((y - self.y_z) ** 2))
        if np.allclose(y, self.y_z):
            return 0.0
        return float(self.mu[index]) if index is not None else math.nan

    def evaluate(self, x, y, index=None):
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(self.v @ x + self.c + self.mu_at(y, index))


def _split_point(pc_set, z):
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != pc_set.n + pc_set.m:
        raise ValueError(f"point has {z.size} coordinates, expected {pc_set.n + pc_set.m}")
    return z[:pc_set.n], z[pc_set.n:]


def _target_slice(pc_set, x_z, y_z):
    """
    The slice at y_z, or None when y_z is outside the box.

    Raises:
        PointInsideSet: if z lies in K
    """
    if not pc_set.grid.contains(y_z):
        return None
    poly = slice_at(pc_set, y_z)
    if not poly.is_empty and lp.distance_inf(poly, x_z) <= MEMBERSHIP_TOL:
        raise PointInsideSet(np.concatenate([x_z, y_z]))
    return poly


def max_margin_direction(poly, x_z):
    """
    Max-margin separating direction between x_z and a nonempty slice.

    Maximizes min over the slice of <v, x> - <v, x_z> subject to
    ||v||_inf <= 1. By LP duality v = -A^T lam for multipliers lam >= 0, and
    the margin is lam . (A x_z - b), so the LP is posed in lam alone.

    Returns:
        tuple: (v, h) with h = min over the slice of <v, x>
    """
    A, b = poly.A, poly.b
    k, n = A.shape
    rows = np.vstack([-np.eye(k), A.T, -A.T])
    rhs = np.concatenate([np.zeros(k), np.ones(n), np.ones(n)])
    result = lp.solve(lp.LinearProgram(-(A @ x_z - b), rows, rhs))
    v = -A.T @ result.x
    h = -lp.support(poly, -v)
    logger.debug("max-margin direction v=%s, slice minimum %.6g", v, h)
    return v, h


def min_value_function(pc_set, v, c):
    """
    m(y) = min over K_y of <v, x> + c at every grid point.

    Returns:
        np.ndarray: shape (G,), NaN where the slice is empty
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    values = np.full(pc_set.grid.size, np.nan)
    for i, poly in enumerate(pc_set.grid_slices):
        if poly.is_empty:
            continue
        values[i] = c if not np.any(v) else -lp.support(poly, -v) + c
    return values


def _squared_distances(pc_set, y_z):
    return np.sum((pc_set.grid.points - y_z) ** 2, axis=1)


def validate_certificate(pc_set, cert, z, tol=DEFAULT_TOL):
    """
    Check p >= -tol on every grid slice and p(z) < 0.

    Works for both SeparationCertificate and ContinuousSeparator.

    Returns:
        ValidationReport
    """
    x_z, y_z = _split_point(pc_set, z)
    lowest, argmin = math.inf, None
    for i, poly in enumerate(pc_set.grid_slices):
        if poly.is_empty:
            continue
        y = pc_set.grid.points[i]
        if isinstance(cert, ContinuousSeparator):
            offset = cert.c + cert.mu_at(y, i)
        else:
            offset = cert.c + cert.M * float(np.sum((y - cert.y_z) ** 2))
        if np.any(cert.v):
            x = lp.support_point(poly, -cert.v)
            value = float(cert.v @ x) + offset
        else:
            x, value = poly.chebyshev_center, offset
        if value < lowest:
            lowest, argmin = value, (tuple(float(t) for t in x), tuple(float(t) for t in y))
    at_z = cert.evaluate(x_z, y_z)
    return ValidationReport(lowest, argmin, at_z, tol, lowest >= -tol and at_z < 0)


def separate_polynomial(pc_set, z, tol=DEFAULT_TOL, margin_fraction=MARGIN_FRACTION,
                        m_max=M_MAX):
    """
    Build a validated separating partially affine polynomial for z outside K.

    Args:
        pc_set: PartiallyConvexSet
        z: point (x_z, y_z) of length n + m
        tol: nonnegativity tolerance on K
        margin_fraction: share of the slice gap kept as margin delta
        m_max: give up once M exceeds this

    Returns:
        SeparationCertificate with its ValidationReport attached

    Raises:
        PointInsideSet: if z is in K
        BigMSearchFailed: if no M <= m_max validates
    """
    x_z, y_z = _split_point(pc_set, z)
    poly = _target_slice(pc_set, x_z, y_z)
    dist2 = _squared_distances(pc_set, y_z)

    if poly is None or poly.is_empty:
        gamma = projection_gamma(pc_set, y_z)
        M = 1.0 / gamma if math.isfinite(gamma) else 0.0
        cert = SeparationCertificate(Branch.SLICE_EMPTY, np.zeros(pc_set.n), -1.0, M,
                                     y_z, 0.0, gamma)
        logger.info("empty slice at y_z=%s: gamma=%.6g, M=%.6g", y_z, gamma, M)
    else:
        v, h = max_margin_direction(poly, x_z)
        gap = h - float(v @ x_z)
        delta = margin_fraction * gap
        c = -h + delta
        minima = min_value_function(pc_set, v, c)
        away = (dist2 > 0) & ~np.isnan(minima)
        ratios = -minima[away] / dist2[away]
        M = max(0.0, 2.0 * float(ratios.max())) if ratios.size else 0.0
        cert = SeparationCertificate(Branch.SLICE_NONEMPTY, v, c, M, y_z, delta)
        logger.info("slice gap %.6g, margin %.6g, initial M=%.6g", gap, delta, M)

    report = validate_certificate(pc_set, cert, z, tol)
    while not report.passed:
        if report.value_at_z >= 0 or cert.M > m_max:
            raise BigMSearchFailed(m_max, report.argmin, report.min_on_K)
        M = 2.0 * cert.M if cert.M > 0 else 1.0
        logger.warning("certificate min %.3g below tolerance, doubling M to %.6g",
                       report.min_on_K, M)
        cert = SeparationCertificate(cert.branch, cert.v, cert.c, M, cert.y_z,
                                     cert.delta, cert.gamma)
        report = validate_certificate(pc_set, cert, z, tol)
    return SeparationCertificate(cert.branch, cert.v, cert.c, cert.M, cert.y_z,
                                 cert.delta, cert.gamma, report)


def separate_continuous(pc_set, z, tol=DEFAULT_TOL, margin_fraction=MARGIN_FRACTION):
    """
    Continuous partially affine separator f = <v, x> + c + mu(y).

    When y_z is outside the projection the distance separator
    f = ||y - y_z||^2 - d^2 / 2 is returned instead.

    Raises:
        PointInsideSet: if z is in K
    """
    x_z, y_z = _split_point(pc_set, z)
    poly = _target_slice(pc_set, x_z, y_z)
    dist2 = _squared_distances(pc_set, y_z)

    if poly is None or poly.is_empty:
        inside = pc_set.projection_mask
        d2 = float(dist2[inside].min()) if inside.any() else 1.0
        sep = ContinuousSeparator('distance', np.zeros(pc_set.n), -d2 / 2.0, dist2, y_z)
    else:
        v, h = max_margin_direction(poly, x_z)
        delta = margin_fraction * (h - float(v @ x_z))
        c = -h + delta
        minima = min_value_function(pc_set, v, c)
        mu = np.where(np.isnan(minima), 0.0, np.maximum(0.0, -minima))
        at_z = pc_set.grid.index_of(y_z)
        if at_z is not None:
            mu[at_z] = 0.0
        sep = ContinuousSeparator('correction', v, c, mu, y_z, delta, minima)
        logger.info("correction term positive at %d of %d grid points",
                    int(np.count_nonzero(mu > 0)), mu.size)

    report = validate_certificate(pc_set, sep, z, tol)
    if not report.passed:
        logger.warning("continuous separator failed validation: min %.3g, f(z)=%.3g",
                       report.min_on_K, report.value_at_z)
    return ContinuousSeparator(sep.kind, sep.v, sep.c, sep.mu, sep.y_z, sep.delta,
                               sep.min_values, report)


def projection_gamma(pc_set, y_z):
    """min over projected grid points of ||y - y_z||^2 (inf if K is empty)."""
    points = project_y(pc_set)
    if points.shape[0] == 0:
        return math.inf
    return float(np.min(np.sum((points - np.asarray(y_z, dtype=float)) ** 2, axis=1)))
