"""Command line entry point: ``ttopt run | sweep-dims | sweep-modes | report``.

Exit codes: 0 on success, 2 if any run failed, 1 on a configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .errors import UnknownBenchmark
from .harness import (ExperimentConfig, aggregate, emit_report, load_records, render_report,
                      run_dimension_sweep, run_experiment, run_modesize_study, wall_time_limit)

log = logging.getLogger("ttopt")

EXIT_OK, EXIT_CONFIG, EXIT_RUN_FAILED = 0, 1, 2

_SUFFIX_FORMATS = {".csv": "csv", ".json": "json", ".md": "markdown"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for failed runs here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_options(p, *, dims=True):
    p.add_argument("--benchmark", "-b", default="F1", help="F1..F10, a function name, or 'all'")
    if dims:
        p.add_argument("--dim", "-d", type=int, default=10)
    p.add_argument("--rank", "-r", type=int, default=4)
    p.add_argument("-p", type=int, default=2, help="submode size P")
    p.add_argument("-q", type=int, default=25, help="submodes per dimension (P**q grid points)")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="first seed; runs use seed..seed+runs-1")
    p.add_argument("--max-sweeps", type=int, default=None)
    p.add_argument("--out", "-o", default=None, help="output file (.csv, .json or .md)")
    p.add_argument("--format", choices=["csv", "json", "markdown"], default=None,
                   help="output format (default: from the --out suffix, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ttopt", description="Grid optimizer benchmark campaigns.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="seeded runs of one method on one or all benchmarks")
    _add_run_options(p)
    p.add_argument("--budget", "-m", type=int, default=100_000, help="objective evaluations per run")
    p.add_argument("--method", choices=["ttopt", "random"], default="ttopt")
    p.add_argument("--no-quantize", action="store_true",
                   help="sweep over the d modes of size P**q instead of d*q modes of size P")

    p = sub.add_parser("sweep-dims", help="one campaign per dimension with budget factor*d")
    _add_run_options(p, dims=False)
    p.add_argument("--dims", type=int, nargs="+", default=[10, 50, 100])
    p.add_argument("--factor", type=int, default=10_000)
    p.add_argument("--max-wall-time", type=float, default=None,
                   help="seconds after which remaining runs are skipped")

    p = sub.add_parser("sweep-modes", help="quantized vs plain grids for several q")
    _add_run_options(p)
    p.add_argument("--budget", "-m", type=int, default=100_000)
    p.add_argument("--qs", type=int, nargs="+", default=[10, 12, 14, 16, 18, 20])
    p.add_argument("--no-tt", action="store_true", help="skip the unquantized solver")
    p.add_argument("--max-wall-time", type=float, default=None)

    p = sub.add_parser("report", help="convert or summarize a results file")
    p.add_argument("input", help="results file written by run/sweep (.csv or .json)")
    p.add_argument("--out", "-o", default=None)
    p.add_argument("--format", choices=["csv", "json", "markdown"], default="markdown")
    return parser


def _output_format(args) -> str:
    if args.format:
        return args.format
    if args.out:
        return _SUFFIX_FORMATS.get(Path(args.out).suffix.lower(), "csv")
    return "csv"


def _common(args) -> dict:
    return dict(benchmark=args.benchmark, rank=args.rank, p=args.p, q=args.q, runs=args.runs,
                seed=args.seed, max_sweeps=args.max_sweeps, out=args.out)


def _summary(records) -> str:
    lines = [f"{'benchmark':<10} {'d':>5} {'method':<12} {'runs':>4} {'mean error':>11} "
             f"{'mean time':>10} {'failed':>6}"]
    for a in aggregate(records):
        lines.append(f"{a.benchmark:<10} {a.d:>5} {a.method:<12} {a.runs:>4} {a.mean_error:>11.3e} "
                     f"{a.mean_time:>9.2f}s {a.failures:>6}")
    return "\n".join(lines)


def _execute(args) -> list:
    if args.command == "run":
        cfg = ExperimentConfig(d=args.dim, budget=args.budget, method=args.method,
                               quantized=not args.no_quantize, **_common(args))
        limit = wall_time_limit()
        return run_experiment(cfg, deadline=None if limit is None else time.monotonic() + limit)
    if args.command == "sweep-dims":
        return run_dimension_sweep(args.benchmark, args.dims, args.factor,
                                   max_wall_time=args.max_wall_time,
                                   **{k: v for k, v in _common(args).items() if k != "benchmark"})
    if args.command == "sweep-modes":
        params = {k: v for k, v in _common(args).items() if k not in ("benchmark", "q")}
        return run_modesize_study(args.benchmark, args.qs, tt=not args.no_tt, d=args.dim,
                                  budget=args.budget, max_wall_time=args.max_wall_time, **params)
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            records = load_records(args.input)
        else:
            records = _execute(args)
    except (ValueError, UnknownBenchmark, OSError) as err:
        print(f"ttopt: error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if not records:
        # only reachable when the wall-time limit skipped every run
        print("ttopt: no runs completed within the wall-time limit", file=sys.stderr)
        return EXIT_OK
    print(_summary(records))
    if args.out:
        try:
            emit_report(records, _output_format(args), args.out)
        except OSError as err:
            print(f"ttopt: error: {err}", file=sys.stderr)
            return EXIT_CONFIG
    elif args.command == "report":
        sys.stdout.write(render_report(records, args.format))
    failed = [r for r in records if r.failed]
    for r in failed:
        print(f"ttopt: run failed: {r.benchmark} d={r.d} seed={r.seed}: {r.failure}", file=sys.stderr)
    return EXIT_RUN_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
