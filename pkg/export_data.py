"""
Canonical JSON and CSV artifacts.

JSON is written with sorted keys and every float passed through
``%.12g`` (non-finite values become null), so re-running a command
produces byte-identical files. Plot data is CSV via pandas.
"""
import json
import math
from enum import Enum

import numpy as np
import pandas as pd

from separation import Branch


def _canonical(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_canonical(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.12g}")
    return value


def canonical_json(data):
    """Sorted-key JSON text with fixed float formatting and a trailing newline."""
    return json.dumps(_canonical(data), sort_keys=True, indent=2) + '\n'


def write_text(text, path=None):
    """Write to ``path``, or stdout when path is None."""
    if path is None:
        print(text, end='')
        return
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)


def poly_to_dict(poly):
    return {'terms': [{'exp': list(exps), 'coef': coef} for exps, coef in poly.terms]}


def grid_to_dict(grid):
    data = {'y_box': [list(pair) for pair in grid.box], 'spacing': grid.spacing}
    if grid.is_tensor:
        data['points_per_axis'] = [len(axis) for axis in grid.axes]
    else:
        data['points'] = grid.points
    return data


def set_to_dict(pc_set):
    """The JSON set definition (round-trips through set_data.parse_set)."""
    grid = grid_to_dict(pc_set.grid)
    return {
        'name': pc_set.name,
        'n': pc_set.n,
        'm': pc_set.m,
        'x_bound': pc_set.x_bound,
        'y_box': grid.pop('y_box'),
        'grid': grid,
        'constraints': [{'a': [poly_to_dict(p) for p in row.a], 'b': poly_to_dict(row.b)}
                        for row in pc_set.constraints],
        'numeric_constraints': {
            str(i): [{'a': a_row, 'b': b_val} for a_row, b_val in zip(A, b)]
            for i, (A, b) in sorted(pc_set.numeric_constraints.items())
        },
    }


def paff_to_dict(p):
    return {'n': p.n, 'm': p.m, 'coeffs': [poly_to_dict(c) for c in p.coeffs]}


def caff_to_dict(c, grid_ref=None):
    return {'n': c.n, 'grid_ref': grid_ref, 'values': c.values}


def module_to_dict(mod):
    grid = grid_to_dict(mod.grid)
    return {
        'name': mod.name,
        'n': mod.n,
        'm': mod.m,
        'x_bound': mod.x_bound,
        'grid': grid,
        'fibers': [{'generators': f.generators} for f in mod.fibers],
    }


def validation_to_dict(report):
    if report is None:
        return None
    return {
        'min_on_K': report.min_on_K,
        'argmin': report.argmin,
        'value_at_z': report.value_at_z,
        'tol': report.tol,
        'passed': report.passed,
    }


def certificate_to_dict(cert):
    return {
        'branch': cert.branch,
        'v': cert.v,
        'c': cert.c,
        'M': cert.M,
        'y_z': cert.y_z,
        'delta': cert.delta,
        'gamma': cert.gamma,
        'validation': validation_to_dict(cert.validation),
    }


def continuous_to_dict(sep):
    return {
        'kind': sep.kind,
        'v': sep.v,
        'c': sep.c,
        'mu': sep.mu,
        'y_z': sep.y_z,
        'delta': sep.delta,
        'validation': validation_to_dict(sep.validation),
    }


def _hemi_to_dict(check):
    return {'ok': check.ok, 'witness': check.witness, 'failures': len(check.failures)}


def regularity_to_dict(pc_set, report):
    return {
        'set': pc_set.name,
        'verdict': report.verdict,
        'reason': report.reason,
        'interior': {
            'ok': report.interior.all_ok,
            'radii': report.interior.radii,
            'min_radius': (float(np.nanmin(report.interior.radii))
                           if np.any(~np.isnan(report.interior.radii)) else None),
        },
        'lhc': _hemi_to_dict(report.lhc),
        'uhc': _hemi_to_dict(report.uhc),
        'tolerances': {'tol_rate': report.tol_rate, 'eps_int': report.eps_int,
                       'spacing': pc_set.grid.spacing},
    }


def roundtrip_to_dict(pc_set, report, eps_rt):
    return {
        'set': pc_set.name,
        'distance': report.distance,
        'eps_rt': eps_rt,
        'passed': report.passed(eps_rt),
        'profile': [{'y': y, 'hausdorff': d} for y, d in zip(report.points, report.profile)],
    }


def axioms_to_dict(report):
    return {
        'passed': report.passed,
        'checks': {name: {'passed': c.passed, 'detail': c.detail}
                   for name, c in report.checks.items()},
        'norm_constants': {'m': report.norm_constants[0], 'M': report.norm_constants[1]},
    }


def _axis_names(prefix, count):
    return [prefix] if count == 1 else [f'{prefix}{k + 1}' for k in range(count)]


def set_plot_frame(pc_set):
    """
    Slice boundaries on the grid: y columns, then x_min / x_max per x axis.

    Grid points with an empty slice are left out.
    """
    y_cols = _axis_names('y', pc_set.m)
    x_cols = []
    for name in _axis_names('x', pc_set.n):
        x_cols += [f'{name}_min', f'{name}_max']
    rows = []
    eye = np.eye(pc_set.n)
    for y, poly in zip(pc_set.grid.points, pc_set.grid_slices):
        if poly.is_empty:
            continue
        bounds = []
        for j in range(pc_set.n):
            bounds += [-poly.support(-eye[j]), poly.support(eye[j])]
        rows.append(list(y) + bounds)
    return pd.DataFrame(rows, columns=y_cols + x_cols)


def certificate_plot_frame(cert, y_values=None):
    """
    Zero-level curve of a certificate with n = m = 1.

    SliceEmpty: the two roots y_z +- 1/sqrt(M) (x is free there).
    SliceNonempty: x_zero(y) = -(c + M (y - y_z)^2) / v on ``y_values``.
    """
    y_z = float(cert.y_z[0])
    if cert.branch is Branch.SLICE_EMPTY:
        if cert.M <= 0:
            return pd.DataFrame(columns=['y', 'x_zero'])
        root = 1.0 / math.sqrt(cert.M)
        return pd.DataFrame({'y': [y_z - root, y_z + root], 'x_zero': [np.nan, np.nan]})
    if y_values is None:
        y_values = np.linspace(y_z - 1.0, y_z + 1.0, 21)
    y_values = np.asarray(y_values, dtype=float).reshape(-1)
    v = float(cert.v[0])
    if v == 0.0:
        return pd.DataFrame(columns=['y', 'x_zero'])
    x_zero = -(cert.c + cert.M * (y_values - y_z) ** 2) / v
    return pd.DataFrame({'y': y_values, 'x_zero': x_zero})


def separator_plot_frame(sep, y_values=None):
    """
    Zero-level curve of a continuous separator with n = m = 1.

    'distance': the two roots y_z +- sqrt(-c) (x is free there).
    'correction': x_zero = -(c + mu) / v on the grid ``y_values`` that mu is stored on.
    """
    if sep.kind == 'distance':
        if sep.c >= 0:
            return pd.DataFrame(columns=['y', 'x_zero'])
        y_z = float(sep.y_z[0])
        root = math.sqrt(-sep.c)
        return pd.DataFrame({'y': [y_z - root, y_z + root], 'x_zero': [np.nan, np.nan]})
    if y_values is None:
        raise ValueError("a correction separator needs the grid its mu is stored on")
    y_values = np.asarray(y_values, dtype=float).reshape(-1)
    if y_values.size != sep.mu.size:
        raise ValueError(f"mu has {sep.mu.size} values but the grid has {y_values.size} points")
    v = float(sep.v[0])
    if v == 0.0:
        return pd.DataFrame(columns=['y', 'x_zero'])
    return pd.DataFrame({'y': y_values, 'x_zero': -(sep.c + sep.mu) / v})


def frame_to_csv(frame):
    """CSV text with %.12g floats and Unix line endings."""
    return frame.to_csv(index=False, float_format='%.12g', lineterminator='\n')
