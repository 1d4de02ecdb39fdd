"""dp5count command line: count, constant, verify, stats, report.

Exit codes: 0 success, 1 error, 2 a verification or precision check failed.
Worker processes come from DP5_WORKERS; every random choice is seeded by --seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .constants import PrecisionError, assemble_constant
from .enumerate import w_tail_fraction
from .report import (
    ENGINES,
    FitError,
    RunConfig,
    build_report,
    fit_leading,
    geometric_grid,
    read_count_grid,
    resolve_heights,
    run_count_grid,
    write_report,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _grid(args) -> tuple[int, ...]:
    if args.B:
        return tuple(sorted(set(int(float(b)) for b in args.B)))
    if args.grid:
        lo, hi, n = args.grid
        return geometric_grid(float(lo), float(hi), int(n))
    return ()


def _add_common(p, heights=True):
    p.add_argument("--field", default="Q", help="Q, Q(i), Q(sqrt-2), Q(sqrt-3), Q(sqrt-7), Q(sqrt-11)")
    if heights:
        p.add_argument("--heights", default="std6", help="std6, sym12 or a JSON member list")
    p.add_argument("--seed", type=int, default=0)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=str)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_count(args) -> int:
    cfg = RunConfig(args.field, args.heights, args.engine, _grid(args), args.shards, args.seed,
                    args.out)
    text = run_count_grid(cfg, log=lambda m: print(m, file=sys.stderr))
    if not args.out:
        sys.stdout.write(text)
    return EXIT_FAIL if "budget-exceeded" in text else EXIT_OK


def _constant(args):
    H = resolve_heights(args.heights, args.field)
    return assemble_constant(args.field, H, p_max=args.p_max, method=args.method,
                             rtol=args.rtol, seed=args.seed)


def cmd_constant(args) -> int:
    try:
        bd = _constant(args)
    except PrecisionError as exc:
        print(f"precision not met: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(bd.as_dict(), args.json)
    return EXIT_OK


def cmd_verify(args) -> int:
    kw = {}
    if args.n is not None:
        kw["n"] = args.n
    if args.B is not None:
        kw["B"] = args.B
    rep = run_suite(args.suite, field=args.field, seed=args.seed, **kw)
    _emit(rep.as_dict(), args.json)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_stats(args) -> int:
    H = resolve_heights(args.heights, args.field)
    table = w_tail_fraction(args.field, H, args.B, [float(w) for w in args.W])
    _emit({"field": args.field, "heights_hash": H.spec_hash, "B": args.B,
           "w_tail_fraction": [{"W": w, "fraction": f} for w, f in table]}, args.json)
    return EXIT_OK


def cmd_report(args) -> int:
    if args.counts:
        data = read_count_grid(args.counts)
    else:
        cfg = RunConfig(args.field, args.heights, "reduced", _grid(args), 1, args.seed)
        data = read_count_grid(run_count_grid(cfg))
    if not data:
        print("no counts available", file=sys.stderr)
        return EXIT_ERROR
    try:
        bd = _constant(args)
    except PrecisionError as exc:
        print(f"precision not met: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        fit = fit_leading(data, float(bd.value))
    except FitError as exc:
        print(f"fit skipped: {exc}", file=sys.stderr)
        fit = None
    wt = None
    if args.wtail_B:
        H = resolve_heights(args.heights, args.field)
        wt = w_tail_fraction(args.field, H, args.wtail_B, [1.0, 2.0, 4.0, 8.0, 16.0])
    rep = build_report(data, bd, fit, wt, args.wtail_B,
                       meta={"field": args.field, "heights": args.heights, "seed": args.seed})
    write_report(rep, args.json, args.plot)
    print(json.dumps({"report_hash": rep["report_hash"], "c": rep["constant"]["c"],
                      "fit_ratio": fit.ratio if fit else None}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dp5count", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact counts N(B) over a grid, as CSV")
    _add_common(p)
    p.add_argument("--engine", choices=ENGINES, default="reduced")
    p.add_argument("--B", nargs="+", help="explicit height bounds")
    p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "POINTS"), help="geometric grid")
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_count)

    def constant_opts(p):
        p.add_argument("--p-max", type=int, default=10**6)
        p.add_argument("--method", choices=("integral", "volume"), default="integral")
        p.add_argument("--rtol", type=float, default=None,
                       help="fail (exit 2) if the interval is wider than this")

    p = sub.add_parser("constant", help="the predicted leading constant with its breakdown")
    _add_common(p)
    constant_opts(p)
    p.add_argument("--json", help="output path (default stdout)")
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("verify", help="run an identity suite")
    _add_common(p, heights=False)
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--n", type=int, default=None, help="number of random cases")
    p.add_argument("--B", type=int, default=None, help="height bound (mobius suite)")
    p.add_argument("--json", help="output path (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="fraction of points with W_max > W")
    _add_common(p)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--W", nargs="+", default=["1", "2", "4", "8", "16"])
    p.add_argument("--json", help="output path (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="JSON report and plot script")
    _add_common(p)
    constant_opts(p)
    p.add_argument("--counts", help="grid CSV from `count` (otherwise counted now)")
    p.add_argument("--B", nargs="+")
    p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "POINTS"))
    p.add_argument("--wtail-B", type=int, default=None)
    p.add_argument("--json", default="report.json")
    p.add_argument("--plot", default="plot_ratio.py")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
