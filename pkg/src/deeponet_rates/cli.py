"""Command-line driver.

    deeponet-rates [--seed N] [--out PATH] [--config PATH] [--threads N] COMMAND ...

Commands are the problem ids (one run, one summary line), ``sweep`` (CSV
report plus fitted slope) and ``acceptance`` (PASS/FAIL per criterion).
Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from ._errors import DeepONetRatesError
from .harness import AXES, SweepSpec, format_float, gnuplot_script, run_sweep, write_atomic
from .problems import DEFAULTS, PROBLEMS, run_problem

GLOBAL_KEYS = ("seed", "out", "threads")


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


class UsageError(Exception):
    pass


def _global_options(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="root seed (u64)")
    parser.add_argument("--out", default=d, help="output path (CSV file or directory)")
    parser.add_argument("--config", default=d, help="key = value configuration file")
    parser.add_argument("--threads", type=int, default=d, help="worker threads for sweeps")


def build_parser():
    parser = argparse.ArgumentParser(prog="deeponet-rates", description=__doc__.split("\n")[0],
                                     allow_abbrev=False)
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for pid in PROBLEMS:
        sp = sub.add_parser(pid, help=f"run {pid} once", allow_abbrev=False,
                            description="Problem parameters are passed as --name value.")
        _global_options(sp, suppress=True)
        sp.add_argument("--dump", help="field CSV (or matrix for FD problems)")
        sp.add_argument("--manifest", help="directory for a DeepONet model manifest")
    sw = sub.add_parser("sweep", help="parameter sweep with slope fit", allow_abbrev=False)
    _global_options(sw, suppress=True)
    sw.add_argument("problem", choices=PROBLEMS)
    sw.add_argument("--axis", required=True, choices=AXES)
    sw.add_argument("--values", required=True, help="comma-separated increasing values")
    sw.add_argument("--timing", action="store_true", help="record runtime_ms (not reproducible)")
    sw.add_argument("--gnuplot", help="also write a gnuplot script here")
    acc = sub.add_parser("acceptance", help="run the acceptance suite", allow_abbrev=False)
    _global_options(acc, suppress=True)
    acc.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def _pairs(extra):
    """``--key value`` leftovers to a dict."""
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"missing value for --{key}") from None
        out[key.replace("-", "_")] = val
    return out


def _number(s):
    f = float(s)
    return int(f) if f.is_integer() and "." not in s and "e" not in s.lower() else f


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra and args.command not in PROBLEMS and args.command != "sweep":
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        conf = read_config(args.config) if getattr(args, "config", None) else {}
        params = {k: v for k, v in conf.items() if k not in GLOBAL_KEYS}
        params.update(_pairs(extra))
        seed = args.seed if args.seed is not None else int(conf.get("seed", 0))
        threads = args.threads if args.threads is not None else int(conf.get("threads", 1))
        out = args.out if args.out is not None else conf.get("out")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"deeponet-rates: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"deeponet-rates: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "acceptance":
            return _acceptance(args, out, seed, threads)
        if args.command == "sweep":
            return _sweep(args, params, out, seed, threads)
        return _problem(args, params, out, seed)
    except DeepONetRatesError as exc:
        print(f"deeponet-rates: {type(exc).__name__}: {exc}", file=sys.stderr)
        return int(getattr(exc, "exit_code", 1))
    except UsageError as exc:
        print(f"deeponet-rates: error: {exc}", file=sys.stderr)
        return 2


def _check_keys(problem, params, extra_ok=()):
    unknown = sorted(k for k in params if k not in DEFAULTS[problem] and k not in extra_ok)
    if unknown:
        raise UsageError(f"unknown parameter(s) for {problem}: {', '.join(unknown)}; "
                         f"known: {', '.join(sorted(DEFAULTS[problem]))}")


def _problem(args, params, out, seed):
    _check_keys(args.command, params)
    res = run_problem(args.command, params, seed=seed, dump=args.dump, manifest=args.manifest)
    fields = [f"{k}={v if isinstance(v, str) else format_float(v)}" for k, v in res.items()]
    print(" ".join([args.command] + fields))
    if out:
        lines = ["key,value"] + [f"{k},{v if isinstance(v, str) else format_float(v)}"
                                 for k, v in res.items()]
        write_atomic(out, "\n".join(lines) + "\n")
    return 0


def _sweep(args, params, out, seed, threads):
    try:
        values = [_number(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --values {args.values!r}") from None
    _check_keys(args.problem, params, ("x1_bound_blessed", "t_bound_blessed"))
    spec = SweepSpec(args.problem, args.axis, values, params, seed, out, args.timing)
    rep = run_sweep(spec, threads=threads)
    if not out:
        sys.stdout.write(rep.to_csv())
    if args.gnuplot:
        write_atomic(args.gnuplot, gnuplot_script(out or "-", f"{args.problem} vs {args.axis}"))
    try:
        slope, r2 = rep.slope()
        print(f"slope {format_float(slope)} r2 {format_float(r2)}", file=sys.stderr)
    except DeepONetRatesError as exc:
        print(f"slope undefined: {exc}", file=sys.stderr)
    return 0


def _acceptance(args, out, seed, threads):
    from .acceptance import run_acceptance

    only = None
    if args.only:
        only = {int(v) for v in args.only.split(",")}
    results = run_acceptance(out or "acceptance-out", seed, threads, only,
                             echo=lambda line: print(line, flush=True))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
