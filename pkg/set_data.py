"""
JSON ingestion for sets, functions, modules and certificates.

Every loader raises ``InputError`` for malformed documents so the CLI can
map them to exit code 2. Sets can also be referenced by name as
``builtin:NAME`` or ``builtin:NAME(args)``, e.g. ``builtin:unit_box(2,1)``.
"""
import json
import logging
import re

import numpy as np

from errors import InputError, ParconvError
from geometry import (
    BaseGrid, ConstraintRow, MultiPoly, PartiallyConvexSet, builtin_sets,
)
from config import default_x_bound
from duality import FiberCone, FreeOrderUnitModule
from paff import PAffPolynomial
from separation import Branch, ContinuousSeparator, SeparationCertificate

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = 'builtin:'
_BUILTIN_PATTERN = re.compile(r'^(\w+)(?:\(([^)]*)\))?$')


def load_json(path):
    """Read a JSON document, mapping IO and syntax errors to InputError."""
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e


def parse_point(text, expected=None):
    """Comma-separated coordinates, e.g. "2,0"."""
    try:
        point = np.array([float(v) for v in str(text).split(',')])
    except ValueError:
        raise InputError(f"cannot parse point {text!r}") from None
    if expected is not None and point.size != expected:
        raise InputError(f"point {text!r} has {point.size} coordinates, expected {expected}")
    return point


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing key {key!r}")
    return obj[key]


def _guarded(what, build, *args):
    """Run a document builder, reporting wrongly typed fields as InputError."""
    try:
        return build(*args)
    except ParconvError:
        raise
    except (TypeError, ValueError, AttributeError) as e:
        raise InputError(f"bad {what}: {e}") from e


def parse_poly(obj, m):
    """MultiPoly from {"terms": [{"exp": [...], "coef": r}, ...]} or a bare number."""
    if isinstance(obj, (int, float)):
        return MultiPoly.constant(float(obj), m)
    terms = _require(obj, 'terms', 'polynomial')
    try:
        return MultiPoly(m, tuple((tuple(t['exp']), float(t['coef'])) for t in terms))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad polynomial term: {e}") from e


def parse_grid(obj, box):
    """BaseGrid from {"points_per_axis": k} or {"points": [[...], ...]}."""
    if not isinstance(obj, dict):
        raise InputError(f"grid must be an object, got {obj!r}")
    try:
        if 'points_per_axis' in obj:
            return BaseGrid.tensor(box, obj['points_per_axis'])
        if 'points' in obj:
            return BaseGrid.from_points(box, obj['points'])
    except (TypeError, ValueError) as e:
        raise InputError(f"bad grid: {e}") from e
    raise InputError("grid needs 'points_per_axis' or 'points'")


def _check_box(box, m, where):
    if not isinstance(box, list) or len(box) != m:
        raise InputError(f"{where} y_box must list {m} [lo, hi] pairs, got {box!r}")
    return box


def _build_set(obj, name):
    n = int(_require(obj, 'n', 'set'))
    m = int(_require(obj, 'm', 'set'))
    box = _check_box(_require(obj, 'y_box', 'set'), m, 'set')
    grid = parse_grid(_require(obj, 'grid', 'set'), box)
    rows = []
    for row in obj.get('constraints', []):
        a = _require(row, 'a', 'constraint')
        if len(a) != n:
            raise InputError(f"constraint has {len(a)} x-coefficients, expected {n}")
        rows.append(ConstraintRow(tuple(parse_poly(p, m) for p in a),
                                  parse_poly(_require(row, 'b', 'constraint'), m)))
    numeric = {}
    for key, entries in obj.get('numeric_constraints', {}).items():
        try:
            numeric[int(key)] = (np.array([e['a'] for e in entries], dtype=float).reshape(-1, n),
                                 np.array([e['b'] for e in entries], dtype=float))
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"bad numeric constraints at y_index {key}: {e}") from e
    try:
        return PartiallyConvexSet(n, grid, tuple(rows),
                                  float(obj.get('x_bound', default_x_bound())),
                                  numeric, obj.get('name', name))
    except ValueError as e:
        raise InputError(str(e)) from e


def parse_set(obj, name='set'):
    """PartiallyConvexSet from the JSON set definition."""
    return _guarded('set definition', _build_set, obj, name)


def builtin_set(ref, points_per_axis=None):
    """
    Construct a builtin set from "NAME" or "NAME(a,b)".

    Raises:
        InputError: for unknown names or bad arguments
    """
    match = _BUILTIN_PATTERN.match(ref.strip())
    registry = builtin_sets()
    if not match or match.group(1) not in registry:
        raise InputError(f"unknown builtin {ref!r}; available: {', '.join(sorted(registry))}")
    args = []
    if match.group(2):
        try:
            args = [int(v) for v in match.group(2).split(',') if v.strip()]
        except ValueError:
            raise InputError(f"builtin arguments must be integers: {ref!r}") from None
    kwargs = {} if points_per_axis is None else {'points_per_axis': points_per_axis}
    try:
        return registry[match.group(1)](*args, **kwargs)
    except TypeError as e:
        raise InputError(f"bad arguments for builtin {ref!r}: {e}") from e


def load_document(ref):
    """
    Resolve a reference to either a builtin set or a parsed JSON document.

    Returns:
        PartiallyConvexSet for builtin references, dict otherwise
    """
    if ref.startswith(BUILTIN_PREFIX):
        return builtin_set(ref[len(BUILTIN_PREFIX):])
    return load_json(ref)


def document_kind(obj):
    """'set', 'module', 'certificate', 'separator' or 'paff'."""
    if isinstance(obj, PartiallyConvexSet):
        return 'set'
    if not isinstance(obj, dict):
        raise InputError(f"expected a JSON object, got {type(obj).__name__}")
    if 'fibers' in obj:
        return 'module'
    if 'branch' in obj:
        return 'certificate'
    if 'kind' in obj and 'mu' in obj:
        return 'separator'
    if 'coeffs' in obj or 'function' in obj:
        return 'paff'
    return 'set'


def load_set(ref, points_per_axis=None):
    """PartiallyConvexSet from a path or builtin reference."""
    if ref.startswith(BUILTIN_PREFIX):
        return builtin_set(ref[len(BUILTIN_PREFIX):], points_per_axis)
    obj = load_json(ref)
    kind = document_kind(obj)
    if kind != 'set':
        raise InputError(f"{ref} is a {kind} document, not a set definition")
    return parse_set(obj, name=ref)


def _build_paff(obj):
    obj = obj.get('function', obj) if isinstance(obj, dict) else obj
    n = int(_require(obj, 'n', 'paff'))
    m = int(_require(obj, 'm', 'paff'))
    coeffs = _require(obj, 'coeffs', 'paff')
    if len(coeffs) != n + 1:
        raise InputError(f"paff needs {n + 1} coefficients, got {len(coeffs)}")
    return PAffPolynomial(n, m, tuple(parse_poly(c, m) for c in coeffs))


def parse_paff(obj):
    """PAffPolynomial from {"n", "m", "coeffs": [poly, ...]} (optionally wrapped in "function")."""
    return _guarded('partially affine function', _build_paff, obj)


def _build_module(obj):
    n = int(_require(obj, 'n', 'module'))
    m = int(_require(obj, 'm', 'module'))
    grid_obj = _require(obj, 'grid', 'module')
    box = _check_box(_require(grid_obj, 'y_box', 'module grid'), m, 'module grid')
    grid = parse_grid(grid_obj, box)
    try:
        fibers = tuple(FiberCone(n, np.array(f['generators'], dtype=float))
                       for f in _require(obj, 'fibers', 'module'))
    except KeyError as e:
        raise InputError(f"fiber is missing {e}") from e
    return FreeOrderUnitModule(n, m, grid, fibers,
                               float(obj.get('x_bound', default_x_bound())),
                               obj.get('name', 'module'))


def parse_module(obj):
    """FreeOrderUnitModule from {"n", "m", "grid", "fibers": [{"generators": ...}]}."""
    return _guarded('module', _build_module, obj)


def parse_certificate(obj):
    try:
        return SeparationCertificate(
            Branch(obj['branch']), np.array(obj['v'], dtype=float), float(obj['c']),
            float(obj['M']), np.array(obj['y_z'], dtype=float),
            float(obj.get('delta') or 0.0), obj.get('gamma'))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad certificate: {e}") from e


def parse_separator(obj):
    """ContinuousSeparator as written by ``separate --continuous``."""
    try:
        kind = obj['kind']
        if kind not in ('correction', 'distance'):
            raise ValueError(f"unknown separator kind {kind!r}")
        mu = np.array([np.nan if v is None else v for v in obj['mu']], dtype=float)
        return ContinuousSeparator(kind, np.array(obj['v'], dtype=float), float(obj['c']), mu,
                                   np.array(obj['y_z'], dtype=float),
                                   float(obj.get('delta') or 0.0))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad continuous separator: {e}") from e
