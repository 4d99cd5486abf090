"""
Exception types raised by the partially convex sets toolkit.

Every error is a ``ValueError`` underneath, so callers that only care about
"bad input or impossible request" can catch that. LP failure modes are not
exceptions; they come back as ``LpResult.status``.
"""


class ParconvError(ValueError):
    """Base class for all toolkit errors."""


class InputError(ParconvError):
    """Malformed JSON, unknown builtin, or an invalid configuration value."""


class YOutsideBox(ParconvError):
    """A parameter point y lies outside the grid box."""

    def __init__(self, y, box):
        self.y = tuple(float(v) for v in y)
        self.box = box
        super().__init__(f"y={self.y} is outside the box {box}")


class EmptyPolytope(ParconvError):
    """An operation that needs a nonempty polytope received an empty one."""


class PointInsideSet(ParconvError):
    """The point to be separated belongs to the set."""

    def __init__(self, z):
        self.z = tuple(float(v) for v in z)
        super().__init__(f"point {self.z} lies in the set; nothing to separate")


class BigMSearchFailed(ParconvError):
    """No multiplier M up to M_max validated the separating polynomial.

    Attributes:
        sample: (x, y) of the most violating K sample at the last M tried
        value: certificate value at that sample
    """

    def __init__(self, m_max, sample, value):
        self.m_max = m_max
        self.sample = sample
        self.value = value
        super().__init__(
            f"no M <= {m_max:g} validates; worst sample {sample} has value {value:.3g}")


class DegenerateSlice(ParconvError):
    """A slice has (numerically) empty interior, so coefficients are not unique."""

    def __init__(self, y, radius):
        self.y = tuple(float(v) for v in y)
        self.radius = radius
        super().__init__(f"slice at y={self.y} has Chebyshev radius {radius:.3g}")


class SingularSystem(ParconvError):
    """The interpolation system M(y) c(y) = F(y) is numerically singular."""

    def __init__(self, y, det):
        self.y = tuple(float(v) for v in y)
        self.det = det
        super().__init__(f"singular system at y={self.y} (|det|={abs(det):.3g})")


class GridNotTensor(ParconvError):
    """A tensor-product grid was required."""


class NotRegular(ParconvError):
    """The set failed the regularity check.

    Attributes:
        report: the RegularityReport that failed
    """

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"set is not regular (verdict={report.verdict}, reason={report.reason})")


class DimensionTooLarge(ParconvError):
    """Vertex or cone enumeration was requested above the supported dimension."""


class ConeNotPointed(ParconvError):
    """A fiber cone contains a line, so the order unit norm is degenerate."""


class NotIsometry(ParconvError):
    """A matrix V does not satisfy V^T V = I."""
