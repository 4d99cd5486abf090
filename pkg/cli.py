#!/usr/bin/env python3
"""
Partially convex sets toolkit - command line entry point.

Loads a set (JSON file or ``builtin:NAME``), runs one pipeline and writes a
canonical JSON (or CSV) artifact:

    check-regularity  interior / LHC / UHC report
    separate          separation certificate for a point outside the set
    recover           coefficient functions of a partially affine function
    approx            Bernstein approximation of recovered coefficients
    dualize           free order unit module of a regular set
    statespace        coordinate state space of a module
    roundtrip         set -> module -> state space distance
    gamma-test        randomized matrix compression identities
    plot-data         slice boundaries or certificate zero levels as CSV

Exit codes: 0 success, 1 semantic failure (not regular, validation failed),
2 input error.

Usage:
    python cli.py check-regularity builtin:fig1
    python cli.py separate builtin:fig1 --point 0,2 --output cert.json
    python cli.py approx builtin:unit_box --samples f.json --degree 4
"""
import argparse
import logging
import sys

import numpy as np
import pandas as pd

import duality
import export_data
import gamma
import paff
import regularity
import separation
import set_data
from config import RunConfig, get_log_level
from errors import InputError, ParconvError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _banner(title):
    print(f"\n{'=' * 70}")
    print(f"  {title}")
    print(f"{'=' * 70}")


def _emit(config, payload):
    """
    Write the JSON payload to --output (and print a summary) or to stdout.

    Returns:
        bool: True when the human-readable summary should be printed
    """
    export_data.write_text(export_data.canonical_json(payload), config.output)
    return config.output is not None


def _load_set(config, ref=None):
    return set_data.load_set(ref or config.inputs[0], config.points_per_axis)


def _load_module(config, ref):
    """Module from a module JSON, or dualized on the fly from a set reference."""
    doc = set_data.load_document(ref)
    if set_data.document_kind(doc) == 'module':
        return set_data.parse_module(doc)
    pc_set = doc if not isinstance(doc, dict) else set_data.parse_set(doc, name=ref)
    return duality.module_from_set(pc_set, config.tol_rate, config.eps_int)


def cmd_check_regularity(config):
    pc_set = _load_set(config)
    report = regularity.check_regular(pc_set, config.tol_rate, config.eps_int)
    payload = export_data.regularity_to_dict(pc_set, report)
    if _emit(config, payload):
        _banner(f"REGULARITY - {pc_set.name}")
        table = pd.DataFrame([
            {'check': 'interior', 'ok': report.interior.all_ok,
             'detail': f"min radius {payload['interior']['min_radius']}"},
            {'check': 'lhc', 'ok': report.lhc.ok, 'detail': report.lhc.witness or ''},
            {'check': 'uhc', 'ok': report.uhc.ok, 'detail': report.uhc.witness or ''},
        ])
        print(table.to_string(index=False))
        print(f"\n  Verdict: {report.verdict}" + (f" ({report.reason})" if report.reason else ''))
    return EXIT_OK if report.is_regular else EXIT_FAIL


def cmd_separate(config, point, continuous=False):
    pc_set = _load_set(config)
    z = set_data.parse_point(point, pc_set.n + pc_set.m)
    if continuous:
        sep = separation.separate_continuous(pc_set, z, config.tol)
        payload = export_data.continuous_to_dict(sep)
    else:
        sep = separation.separate_polynomial(pc_set, z, config.tol)
        payload = export_data.certificate_to_dict(sep)
    if _emit(config, payload):
        _banner(f"SEPARATION - {pc_set.name}, z = {tuple(z)}")
        report = sep.validation
        print(f"  min over K:   {report.min_on_K:.6g}")
        print(f"  value at z:   {report.value_at_z:.6g}")
        print(f"  validated:    {report.passed}")
    return EXIT_OK if sep.validation.passed else EXIT_FAIL


def _load_function(ref):
    return set_data.parse_paff(set_data.load_json(ref))


def cmd_recover(config):
    pc_set = _load_set(config)
    f = _load_function(config.inputs[1])
    caff = paff.recover_coefficients(pc_set, f.evaluate, config.eps_int)
    if _emit(config, export_data.caff_to_dict(caff, config.inputs[0])):
        _banner(f"RECOVERED COEFFICIENTS - {pc_set.name}")
        print(pd.DataFrame(paff.coefficient_modulus(caff)).to_string(index=False))
    return EXIT_OK


def cmd_approx(config, degree):
    pc_set = _load_set(config)
    f = _load_function(config.inputs[1])
    caff = paff.recover_coefficients(pc_set, f.evaluate, config.eps_int)
    approx = paff.approx_bernstein(caff, degree)
    payload = export_data.paff_to_dict(approx)
    payload['approximation'] = {
        'degree': degree,
        'sup_distance': paff.sup_distance(pc_set, caff, approx),
        'error_bound': paff.approximation_error_bound(pc_set, caff, approx),
    }
    if _emit(config, payload):
        _banner(f"BERNSTEIN APPROXIMATION - {pc_set.name}, degree {degree}")
        for key in ('sup_distance', 'error_bound'):
            print(f"  {key:<14} {payload['approximation'][key]:.6g}")
    return EXIT_OK


def cmd_dualize(config, check_axioms=False):
    pc_set = _load_set(config)
    mod = duality.module_from_set(pc_set, config.tol_rate, config.eps_int)
    payload = export_data.module_to_dict(mod)
    status = EXIT_OK
    if check_axioms:
        report = duality.check_module_axioms(mod, config.tol_rate, seed=config.seed)
        payload['axioms'] = export_data.axioms_to_dict(report)
        status = EXIT_OK if report.passed else EXIT_FAIL
    if _emit(config, payload):
        _banner(f"MODULE - {mod.name}")
        print(f"  type (n, m):  ({mod.n}, {mod.m})")
        print(f"  fibers:       {len(mod.fibers)}")
        if check_axioms:
            rows = [{'axiom': name, 'passed': c.passed}
                    for name, c in sorted(report.checks.items())]
            print(pd.DataFrame(rows).to_string(index=False))
    return status


def cmd_statespace(config):
    mod = _load_module(config, config.inputs[0])
    recovered, report = duality.state_space_with_report(mod, config.tol_rate, config.eps_int)
    payload = export_data.set_to_dict(recovered)
    payload['regularity'] = export_data.regularity_to_dict(recovered, report)
    if _emit(config, payload):
        _banner(f"STATE SPACE - {mod.name}")
        print(export_data.set_plot_frame(recovered).to_string(index=False))
        print(f"\n  Verdict: {report.verdict}" + (f" ({report.reason})" if report.reason else ''))
    return EXIT_OK if report.is_regular else EXIT_FAIL


def cmd_roundtrip(config):
    pc_set = _load_set(config)
    report = duality.roundtrip_distance(pc_set, config.tol_rate, config.eps_int)
    if _emit(config, export_data.roundtrip_to_dict(pc_set, report, config.eps_rt)):
        _banner(f"ROUND TRIP - {pc_set.name}")
        print(f"  max Hausdorff distance: {report.distance:.3g} (limit {config.eps_rt:g})")
    return EXIT_OK if report.passed(config.eps_rt) else EXIT_FAIL


def cmd_gamma_test(config, trials):
    rng = np.random.default_rng(config.seed)
    rows = gamma.run_gamma_trials(rng, trials)
    ok = all(r['y2_pair_residual'] <= 1e-9 and r['direct_sum_residual'] <= 1e-9
             and r['generic_residual_min'] > 1e-6 for r in rows)
    if _emit(config, {'seed': config.seed, 'passed': ok, 'sizes': rows}):
        _banner("GAMMA IDENTITIES")
        print(pd.DataFrame(rows).to_string(index=False))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_plot_data(config, set_ref=None):
    doc = set_data.load_document(config.inputs[0])
    kind = set_data.document_kind(doc)
    if kind == 'separator':
        sep = set_data.parse_separator(doc)
        if sep.v.size != 1 or sep.y_z.size != 1:
            raise InputError("separator plot data needs n = m = 1")
        y_values = None
        if sep.kind == 'correction':
            if not set_ref:
                raise InputError("a correction separator needs --set for its grid")
            y_values = _load_set(config, set_ref).grid.points[:, 0]
        try:
            frame = export_data.separator_plot_frame(sep, y_values)
        except ValueError as e:
            raise InputError(str(e)) from e
    elif kind == 'certificate':
        cert = set_data.parse_certificate(doc)
        if cert.v.size != 1 or cert.y_z.size != 1:
            raise InputError("certificate plot data needs n = m = 1")
        y_values = None
        if set_ref:
            y_values = _load_set(config, set_ref).grid.points[:, 0]
        frame = export_data.certificate_plot_frame(cert, y_values)
    elif kind == 'set':
        if isinstance(doc, dict):
            pc_set = set_data.parse_set(doc, config.inputs[0])
        else:
            pc_set = _load_set(config)
        frame = export_data.set_plot_frame(pc_set)
    else:
        raise InputError(f"no plot data for a {kind} document")
    export_data.write_text(export_data.frame_to_csv(frame), config.output)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        description="Separation, regularity and duality tools for partially convex sets"
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging on stderr')
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name, help_text, needs_input=True):
        p = sub.add_parser(name, help=help_text)
        if needs_input:
            p.add_argument('input', help='Set/module JSON path or builtin:NAME')
        p.add_argument('--output', '-o', default=None, help='Output path (default: stdout)')
        p.add_argument('--tol', type=float, default=None, help='Certificate tolerance')
        p.add_argument('--tol-rate', type=float, default=None,
                       help='Rate for hemicontinuity checks (tolerance = rate * h)')
        p.add_argument('--eps-int', type=float, default=None, help='Interior radius threshold')
        p.add_argument('--eps-rt', type=float, default=None, help='Round-trip distance limit')
        p.add_argument('--points-per-axis', type=int, default=None,
                       help='Grid resolution override for builtin sets')
        p.add_argument('--seed', type=int, default=None, help='Seed (default: PARCONV_SEED or 0)')
        return p

    add('check-regularity', 'Interior / LHC / UHC report')
    p = add('separate', 'Separation certificate for a point outside the set')
    p.add_argument('--point', required=True, help='Point z as comma-separated x,y coordinates')
    p.add_argument('--continuous', action='store_true',
                   help='Continuous separator with correction term instead of a polynomial')
    p = add('recover', 'Recover coefficient functions on the grid')
    p.add_argument('--samples', required=True, help='JSON partially affine function to sample')
    p = add('approx', 'Bernstein approximation of recovered coefficients')
    p.add_argument('--samples', required=True, help='JSON partially affine function to sample')
    p.add_argument('--degree', type=int, required=True, help='Bernstein degree per axis')
    p = add('dualize', 'Free order unit module of a regular set')
    p.add_argument('--check-axioms', action='store_true', help='Attach module axiom surrogates')
    add('statespace', 'Coordinate state space of a module (or of a dualized set)')
    add('roundtrip', 'Hausdorff distance of set -> module -> state space')
    p = add('gamma-test', 'Randomized matrix compression identities', needs_input=False)
    p.add_argument('--trials', type=int, default=100, help='Trials per matrix size')
    p = add('plot-data', 'CSV of slice boundaries or separator zero levels')
    p.add_argument('--set', dest='set_ref', default=None,
                   help='Set whose grid samples a certificate or correction separator')
    return parser


def run(args):
    config = RunConfig.from_args(args)
    command = args.command
    logger.debug("running %s with %s", command, config)
    if command == 'check-regularity':
        return cmd_check_regularity(config)
    if command == 'separate':
        return cmd_separate(config, args.point, args.continuous)
    if command == 'recover':
        return cmd_recover(config)
    if command == 'approx':
        return cmd_approx(config, args.degree)
    if command == 'dualize':
        return cmd_dualize(config, args.check_axioms)
    if command == 'statespace':
        return cmd_statespace(config)
    if command == 'roundtrip':
        return cmd_roundtrip(config)
    if command == 'gamma-test':
        return cmd_gamma_test(config, args.trials)
    return cmd_plot_data(config, args.set_ref)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else get_log_level()
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)
    try:
        return run(args)
    except InputError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ParconvError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())
