"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 numeric failure, 3 bound hit under --strict.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench
from .cme import (
    CacheError,
    CmeOptimizationError,
    cme_coefficients,
    cme_n_for_order,
    default_cache_path,
    optimize_cme_sequence,
    save_cache,
)
from .euler import euler_coefficients, euler_n_for_order
from .expr import ExpressionEvaluationError, ExpressionSyntaxError, expression_query
from .framework import NiltError, evaluate_nilt, evaluate_nilt_mp, shift_coefficients
from .shift import EulerShiftWarning, ShiftSearchConfig, cme_s, euler_s
from .transforms import builtin, builtin_registry
from .weights import decompose_estimate, decompose_weight, figure_series

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BOUND = 0, 1, 2, 3
OUTPUT_VERSION = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    """Fixed 17-significant-digit rendering for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def emit(header, rows, args, comments=(), extra=None):
    """Write rows as CSV (default) or JSON to --output or stdout."""
    if args.format == "json":
        doc = {"version": OUTPUT_VERSION, "columns": header,
               "rows": [{h: _jsonable(v) for h, v in zip(header, r)} for r in rows]}
        if extra:
            doc.update({k: {kk: _jsonable(vv) for kk, vv in v.items()} if isinstance(v, dict) else v
                        for k, v in extra.items()})
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- shared argument handling ---------------------------------------------------


def _add_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--builtin", help="builtin transform pair name (see list-builtins)")
    g.add_argument("--expr", help="transform H(s) as an expression in s")
    p.add_argument("--abscissa", type=float, help="abscissa of convergence for --expr (use -inf if entire)")
    p.add_argument("--bounded", action="store_true", help="assert the time function is bounded (--expr)")


def _add_order(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--order", type=int, help="number of transform evaluations (30 means Euler n=28, CME n=29)")
    g.add_argument("--n", type=int, help="explicit method order n")
    p.add_argument("--cme-n", type=int, help="CME order used to pick theta for euler-s with --n (default n+1)")


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--cache", help="CME coefficient cache file (default: $SHIFTNILT_CACHE_DIR or bundled)")


def _query(args):
    if args.builtin:
        try:
            pair = builtin(args.builtin)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        return pair.query(), pair
    if args.abscissa is None:
        raise UsageError("--expr needs --abscissa")
    try:
        return expression_query(args.expr, args.abscissa, args.bounded), None
    except ExpressionSyntaxError as exc:
        raise UsageError(f"cannot parse expression: {exc}") from None


def _orders(args, method):
    """(euler_n, cme_n) for the chosen method."""
    if args.order is not None:
        return euler_n_for_order(args.order), cme_n_for_order(args.order)
    n = args.n
    if n is None or n < 1:
        raise UsageError("--n must be positive")
    if method.startswith("euler"):
        return n, (args.cme_n or n + 1)
    return None, n


def _config(args):
    return ShiftSearchConfig(epsilon=getattr(args, "epsilon", 0.1))


# -- commands ----------------------------------------------------------------


def cmd_invert(args):
    q, _ = _query(args)
    method = args.method
    en, cn = _orders(args, method)
    cfg = _config(args)
    rows, bound_hit = [], False
    for T in args.T:
        if not T > 0:
            raise UsageError("T values must be positive")
        theta, evals, iters, lo_hit, hi_hit, notes = args.theta, 0, 0, False, False, ()
        if method == "cme":
            value = evaluate_nilt(cme_coefficients(cn, args.cache), q, T, args.theta)
            n_used = cn
        elif method == "euler":
            coeffs = euler_coefficients(en)
            value = (evaluate_nilt_mp(coeffs, q, T, args.theta, args.dps) if args.dps
                     else evaluate_nilt(coeffs, q, T, args.theta))
            n_used = en
        else:
            cme = cme_coefficients(cn, args.cache)
            if method == "cme-s":
                r = cme_s(q, T, cfg=cfg, coeffs=cme)
                n_used = cn
            else:
                with warnings.catch_warnings():
                    # the note is printed below with the T it belongs to
                    warnings.simplefilter("ignore", EulerShiftWarning)
                    r = euler_s(q, T, en, cfg, cme_coeffs=cme, dps=args.dps)
                n_used = en
            value, theta, evals, iters = r.value, r.theta_hat, r.objective_evals, r.iterations
            lo_hit, hi_hit, notes = r.lower_bound_hit, r.upper_bound_hit, r.warnings
        for note in notes:
            print(f"warning: T={fmt(T)}: {note}", file=sys.stderr)
        bound_hit |= lo_hit or hi_hit
        rows.append([T, method, n_used, value, theta, evals, iters, lo_hit, hi_hit])
    header = ["T", "method", "n", "value", "theta_hat", "evals", "iterations", "lower_bound_hit", "upper_bound_hit"]
    emit(header, rows, args)
    if bound_hit and args.strict:
        return EXIT_BOUND
    return EXIT_OK


def cmd_sweep_theta(args):
    q, pair = _query(args)
    en, cn = _orders(args, "euler-s")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    cme = cme_coefficients(cn, args.cache)
    eul = euler_coefficients(en)
    exact = pair.oracle(args.T) if pair is not None else None
    rows = []
    for theta in np.linspace(args.theta_min, args.theta_max, args.steps):
        theta = float(theta)
        vals = []
        for coeffs in (cme, eul):
            try:
                with np.errstate(all="ignore"), warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    vals.append(evaluate_nilt(coeffs, q, args.T, theta))
            except NiltError:
                vals.append(math.nan)
        row = [theta] + vals
        if exact is not None:
            row.append(exact)
        rows.append(row)
    header = ["theta", "cme", "euler"] + (["exact"] if exact is not None else [])
    emit(header, rows, args, comments=[f"T={fmt(args.T)} cme_n={cn} euler_n={en}"])
    return EXIT_OK


def cmd_weight(args):
    method = args.method
    en, cn = _orders(args, method)
    coeffs = euler_coefficients(en) if method == "euler" else cme_coefficients(cn, args.cache)
    ts = np.linspace(args.t_min, args.t_max, args.points)
    pair = None
    if args.builtin:
        try:
            pair = builtin(args.builtin)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        if args.T is None:
            raise UsageError("--builtin needs --T for the weighted integrand")
    cols = figure_series(coeffs, ts, args.theta, pair.oracle if pair else None, args.T)
    header = list(cols)
    rows = [list(r) for r in zip(*cols.values())]
    dec = decompose_weight(shift_coefficients(coeffs, args.theta), args.scan_max)
    summary = {"z_lower": dec.z_lower, "z_upper": dec.z_upper, "f_left": dec.f_left,
               "f_main": dec.f_main, "f_right": dec.f_right}
    if pair is not None:
        left, main, right = decompose_estimate(pair.query(), coeffs, args.T, args.theta, t_max=args.scan_max)
        summary.update({"eps_left": left, "h_main": main, "eps_right": right})
    comments = [f"method={method} n={coeffs.order_n} theta={fmt(args.theta)}"]
    comments.append(" ".join(f"{k}={fmt(v)}" for k, v in summary.items()))
    emit(header, rows, args, comments=comments, extra={"decomposition": summary})
    return EXIT_OK


def cmd_bench_tables(args):
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    ref = bench.load_reference()
    t1 = bench.table1(cache=args.cache)
    report = bench.table2(ref, _config(args), extended=not args.double, cache=args.cache)
    _write_csv(out / "table1.csv", ["method", "order", "n", "z_lower", "z_upper", "f_left", "f_main", "f_right"],
               [[r.method, r.order, r.n, r.z_lower, r.z_upper, r.f_left, r.f_main, r.f_right] for r in t1])
    cols = ["function", "T", "order", "cme_n", "euler_n", "precise", "cme", "cme_s", "euler", "euler_s",
            "theta_hat", "evals", "iterations"]
    _write_csv(out / "table2.csv", cols, [[getattr(r, c) for c in cols] for r in report.rows],
               comments=[" ".join(f"{k}={v}" for k, v in report.metadata.items())])
    comps = bench.compare(t1, report, ref)
    overall = all(c.passed for c in comps)
    _write_csv(out / "comparison.csv", ["table", "row", "column", "reference", "computed", "kind", "tolerance",
                                        "deviation", "status"],
               [[c.table, c.key, c.column, c.reference, c.computed, c.kind, c.tol, c.deviation,
                 "pass" if c.passed else "fail"] for c in comps] + [["overall", "", "", "", "", "", "", "",
                                                                     "pass" if overall else "fail"]])
    failed = [c for c in comps if not c.passed]
    print(f"{len(comps) - len(failed)}/{len(comps)} cells within tolerance; overall {'pass' if overall else 'fail'}")
    for c in failed:
        print(f"  fail: {c.table} {c.key} {c.column}: reference {c.reference:g}, computed {c.computed:g}")
    return EXIT_NUMERIC if (args.strict and not overall) else EXIT_OK


def _write_csv(path, header, rows, comments=()):
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def cmd_generate_cme(args):
    path = Path(args.output) if args.output else default_cache_path()
    from .cme import CmeOptimizerOptions, scv_stable

    def progress(form):
        if not args.quiet:
            print(f"n={form.n} scv={scv_stable(form.omega, form.phases):.12g}", file=sys.stderr, flush=True)

    forms = optimize_cme_sequence(args.max_n, CmeOptimizerOptions(seed=args.seed), progress)
    save_cache(forms, path, seed=args.seed)
    print(f"wrote {len(forms)} CME orders to {path}")
    return EXIT_OK


def cmd_list_builtins(args):
    for p in builtin_registry():
        a = "-inf" if p.abscissa == -math.inf else fmt(p.abscissa)
        print(f"{p.name:12s} h(t) = {p.description:18s} a = {a:5s} H(s) = {p.expression}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="shiftnilt", description="Numerical inverse Laplace transform with optimal shifting")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    inv = sub.add_parser("invert", help="invert a transform at one or more times")
    inv.add_argument("--method", choices=("euler", "cme", "euler-s", "cme-s"), required=True)
    _add_order(inv)
    _add_source(inv)
    inv.add_argument("--T", type=float, nargs="+", required=True)
    inv.add_argument("--theta", type=float, default=0.0, help="fixed shift for euler/cme")
    inv.add_argument("--epsilon", type=float, default=0.1, help="golden-section stopping width")
    inv.add_argument("--dps", type=int, help="evaluate Euler sums with this many decimal digits")
    inv.add_argument("--strict", action="store_true", help="exit 3 when a search bound is hit")
    _add_output(inv)
    inv.set_defaults(func=cmd_invert)

    sw = sub.add_parser("sweep-theta", help="tabulate CME and Euler values over a theta grid")
    _add_order(sw)
    _add_source(sw)
    sw.add_argument("--T", type=float, required=True)
    sw.add_argument("--theta-min", type=float, required=True)
    sw.add_argument("--theta-max", type=float, required=True)
    sw.add_argument("--steps", type=int, default=131)
    _add_output(sw)
    sw.set_defaults(func=cmd_sweep_theta)

    wt = sub.add_parser("weight", help="tabulate the weight function and its decomposition")
    wt.add_argument("--method", choices=("euler", "cme"), required=True)
    _add_order(wt)
    wt.add_argument("--theta", type=float, default=0.0)
    wt.add_argument("--t-min", type=float, default=0.0)
    wt.add_argument("--t-max", type=float, default=4.0)
    wt.add_argument("--points", type=int, default=401)
    wt.add_argument("--scan-max", type=float, default=4.0, help="zero scan window")
    wt.add_argument("--builtin", help="builtin pair for the weighted integrand h(tT) f(t)")
    wt.add_argument("--T", type=float)
    _add_output(wt)
    wt.set_defaults(func=cmd_weight)

    bt = sub.add_parser("bench-tables", help="regenerate the reference tables and compare")
    bt.add_argument("--outdir", default="bench-out")
    bt.add_argument("--double", action="store_true", help="Euler columns in double precision")
    bt.add_argument("--epsilon", type=float, default=0.1)
    bt.add_argument("--cache")
    bt.add_argument("--strict", action="store_true", help="exit 2 when any cell is out of tolerance")
    bt.set_defaults(func=cmd_bench_tables)

    gen = sub.add_parser("generate-cme", help="optimise CME weights and write the cache")
    gen.add_argument("--max-n", type=int, default=60)
    gen.add_argument("--output")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--quiet", action="store_true")
    gen.set_defaults(func=cmd_generate_cme)

    ls = sub.add_parser("list-builtins", help="show builtin transform pairs")
    ls.set_defaults(func=cmd_list_builtins)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"shiftnilt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NiltError, CacheError, CmeOptimizationError, ExpressionEvaluationError, ArithmeticError) as exc:
        print(f"shiftnilt: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"shiftnilt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
