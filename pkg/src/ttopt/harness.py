"""Seeded multi-run campaigns on the benchmark functions and their reports.

A campaign runs one method on one benchmark for ``runs`` consecutive seeds
and produces one :class:`ExperimentRecord` per run. Records are always
returned sorted by ``(benchmark, d, method, seed)`` so reports do not depend
on execution order.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import re
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import benchmarks
from .errors import ObjectiveError, TTOptError
from .grid import GridSpec
from .optimizer import ObjectiveAdapter, OptimizerConfig, OptResult, minimize

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "Aggregate",
    "CSV_COLUMNS",
    "SCHEMA_VERSION",
    "run_experiment",
    "run_dimension_sweep",
    "run_modesize_study",
    "random_search",
    "aggregate",
    "render_report",
    "emit_report",
    "load_records",
    "wall_time_limit",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ["benchmark", "d", "method", "seed", "error", "time_s", "evals"]
SCHEMA_VERSION = 1
METHODS = ("ttopt", "random")
WALL_TIME_ENV = "TTOPT_MAX_WALL_TIME"


@dataclass
class ExperimentConfig:
    """One campaign: ``runs`` seeds of ``method`` on ``benchmark``.

    ``benchmark`` is an id (``"F1"``), a name (``"ackley"``) or ``"all"``.
    With ``quantized=False`` the grid keeps ``p**q`` points per dimension
    and the optimizer sweeps over the ``d`` modes directly. ``label``
    overrides the method name written to reports.
    """

    benchmark: str = "F1"
    d: int = 10
    runs: int = 10
    method: str = "ttopt"
    rank: int = 4
    p: int = 2
    q: int = 25
    budget: int = 100_000
    seed: int = 0
    max_sweeps: int | None = None
    quantized: bool = True
    label: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.p < 2 or self.q < 1:
            raise ValueError(f"need p >= 2 and q >= 1, got p={self.p}, q={self.q}")
        if self.benchmark != "all":
            benchmarks.get(self.benchmark)
        if self.out is not None:
            parent = Path(self.out).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ValueError(f"output directory {parent} is not writable")
        # validates rank/budget/max_sweeps
        self.optimizer_config(self.seed)

    @property
    def method_label(self) -> str:
        return self.label or self.method

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(rank=self.rank, budget=self.budget, max_sweeps=self.max_sweeps,
                               seed=seed)

    def grid(self, bench: benchmarks.BenchmarkSpec) -> GridSpec:
        if self.quantized:
            return GridSpec.quantized_grid(self.d, bench.lower, bench.upper, self.p, self.q)
        return GridSpec.uniform(self.d, bench.lower, bench.upper, self.p**self.q)


@dataclass
class ExperimentRecord:
    """Outcome of one seeded run.

    ``error`` is ``|best - known minimum|``; it is NaN when the minimum is not
    known for this ``d`` or the run failed (``failure`` then holds the
    message).
    """

    benchmark: str
    d: int
    method: str
    seed: int
    error: float
    time_s: float
    evals: int
    best_value: float = math.nan
    best_coords: list = field(default_factory=list)
    status: str = ""
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass
class Aggregate:
    benchmark: str
    d: int
    method: str
    runs: int
    mean_error: float
    mean_time: float
    mean_evals: float
    failures: int


def wall_time_limit() -> float | None:
    """Campaign time cap in seconds from ``TTOPT_MAX_WALL_TIME`` (None if unset)."""
    raw = os.environ.get(WALL_TIME_ENV)
    if not raw:
        return None
    value = float(raw)
    if value <= 0:
        raise ValueError(f"{WALL_TIME_ENV} must be positive, got {raw!r}")
    return value


def _natural(key: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", key)]


def _sort_key(rec: ExperimentRecord):
    return (_natural(rec.benchmark), rec.d, rec.method, rec.seed)


def random_search(obj, spec: GridSpec, m: int, seed: int, batch: int = 10_000) -> OptResult:
    """Best of ``m`` grid points drawn uniformly with replacement.

    ``obj`` is a batched callable on coordinates or an
    :class:`ObjectiveAdapter`; repeated draws are evaluated again.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not isinstance(obj, ObjectiveAdapter):
        obj = ObjectiveAdapter(obj, m, cache=False)
    rng = np.random.default_rng(seed)
    high = np.asarray(spec.mode_sizes)
    drawn = 0
    while drawn < m:
        n = min(batch, m - drawn)
        idx = rng.integers(0, high, size=(n, spec.dims))
        obj(idx, spec.coords(idx))
        drawn += n
    return OptResult(
        best_value=obj.best_value,
        best_indices=obj.best_indices,
        best_coords=obj.best_coords,
        evaluations_used=obj.eval_count,
        sweeps_completed=0,
        trace=list(obj.trace),
        status="budget",
        requests=obj.requests,
        duplicates=obj.duplicates,
    )


def _run_one(cfg: ExperimentConfig, bench: benchmarks.BenchmarkSpec, seed: int) -> ExperimentRecord:
    spec = cfg.grid(bench)
    fn = bench.__call__
    failure = None
    t0 = time.perf_counter()
    try:
        if cfg.method == "random":
            res = random_search(fn, spec, cfg.budget, seed)
        else:
            res = minimize(fn, spec, cfg.optimizer_config(seed))
    except ObjectiveError as err:
        res, failure = err.result, str(err)
    except (TTOptError, ArithmeticError, ValueError) as err:
        res, failure = None, f"{type(err).__name__}: {err}"
    elapsed = time.perf_counter() - t0

    j_min = bench.minimum(cfg.d)
    best = math.nan if res is None else float(res.best_value)
    error = math.nan if failure is not None else abs(best - j_min)
    if failure is not None:
        log.warning("%s d=%d seed=%d failed: %s", bench.id, cfg.d, seed, failure)
    return ExperimentRecord(
        benchmark=bench.id,
        d=cfg.d,
        method=cfg.method_label,
        seed=seed,
        error=error,
        time_s=elapsed,
        evals=0 if res is None else int(res.evaluations_used),
        best_value=best,
        best_coords=[] if res is None or res.best_coords is None else [float(v) for v in res.best_coords],
        status="error" if failure is not None else res.status,
        failure=failure,
    )


def run_experiment(cfg: ExperimentConfig, *, deadline: float | None = None) -> list[ExperimentRecord]:
    """Run seeds ``cfg.seed .. cfg.seed + runs - 1`` and return their records.

    Failed runs are recorded (``failure`` set) and do not stop the campaign.
    Runs that would start after ``deadline`` (a ``time.monotonic()`` value)
    are skipped with a warning.
    """
    benches = benchmarks.catalog() if cfg.benchmark == "all" else [benchmarks.get(cfg.benchmark)]
    records = []
    for bench in benches:
        for seed in range(cfg.seed, cfg.seed + cfg.runs):
            if deadline is not None and time.monotonic() > deadline:
                log.warning("wall-time limit reached; skipping %s d=%d seed=%d", bench.id, cfg.d, seed)
                continue
            rec = _run_one(cfg, bench, seed)
            log.info("%s d=%d %s seed=%d error=%.3g time=%.2fs", rec.benchmark, rec.d,
                     rec.method, rec.seed, rec.error, rec.time_s)
            records.append(rec)
    return sorted(records, key=_sort_key)


def _deadline(max_wall_time):
    if max_wall_time is None:
        max_wall_time = wall_time_limit()
    return None if max_wall_time is None else time.monotonic() + max_wall_time


def run_dimension_sweep(benchmark: str, dims, factor: int = 10_000, *,
                        max_wall_time: float | None = None, **params) -> list[ExperimentRecord]:
    """One campaign per ``d`` in ``dims`` with budget ``factor * d``.

    ``params`` are further :class:`ExperimentConfig` fields. Once
    ``max_wall_time`` seconds (default: ``TTOPT_MAX_WALL_TIME``) have passed,
    the remaining runs are skipped.
    """
    dims = list(dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    deadline = _deadline(max_wall_time)
    records = []
    for d in dims:
        cfg = ExperimentConfig(benchmark=benchmark, d=int(d), budget=factor * int(d), **params)
        records += run_experiment(cfg, deadline=deadline)
    return sorted(records, key=_sort_key)


def run_modesize_study(benchmark: str, qs, *, tt: bool = True, max_wall_time: float | None = None,
                       **params) -> list[ExperimentRecord]:
    """Compare quantized and plain grids with ``p**q`` points per dimension.

    For every ``q`` the quantized solver is labelled ``qtt@N`` and, with
    ``tt=True``, the unquantized one ``tt@N`` where ``N = p**q``.
    """
    qs = list(qs)
    if not qs:
        raise ValueError("qs must be non-empty")
    p = params.pop("p", 2)
    deadline = _deadline(max_wall_time)
    records = []
    for q in qs:
        n = p ** int(q)
        variants = [(True, f"qtt@{n}")] + ([(False, f"tt@{n}")] if tt else [])
        for quantized, label in variants:
            cfg = ExperimentConfig(benchmark=benchmark, p=p, q=int(q), quantized=quantized,
                                   label=label, **params)
            records += run_experiment(cfg, deadline=deadline)
    return sorted(records, key=_sort_key)


def aggregate(records) -> list[Aggregate]:
    """Mean error, time and evaluations per ``(benchmark, d, method)``.

    Failed runs count in ``failures`` but not in the means; an all-failed
    group has NaN means.
    """
    groups: dict = {}
    for rec in sorted(records, key=_sort_key):
        groups.setdefault((rec.benchmark, rec.d, rec.method), []).append(rec)
    out = []
    for (bench, d, method), recs in groups.items():
        ok = [r for r in recs if not r.failed]
        mean = (lambda xs: float(np.mean(xs))) if ok else (lambda xs: math.nan)
        out.append(Aggregate(bench, d, method, len(recs),
                             mean([r.error for r in ok]), mean([r.time_s for r in ok]),
                             mean([r.evals for r in ok]), len(recs) - len(ok)))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.benchmark, r.d, r.method, r.seed, _fmt(r.error), _fmt(r.time_s), r.evals])


def _write_json(records, fh):
    json.dump({"schema": SCHEMA_VERSION, "records": [asdict(r) for r in records]}, fh, indent=1)
    fh.write("\n")


def _markdown(records) -> str:
    aggs = aggregate(records)
    cols = sorted({(a.benchmark, a.d) for a in aggs}, key=lambda c: (_natural(c[0]), c[1]))
    one_d = len({d for _, d in cols}) == 1
    heads = [b if one_d else f"{b} (d={d})" for b, d in cols]
    lookup = {(a.method, a.benchmark, a.d): a for a in aggs}
    lines = ["| method | metric | " + " | ".join(heads) + " |",
             "|---|---|" + "---|" * len(cols)]
    for method in sorted({a.method for a in aggs}):
        for metric, attr in (("ε", "mean_error"), ("τ", "mean_time")):
            cells = []
            for b, d in cols:
                a = lookup.get((method, b, d))
                cells.append("-" if a is None else f"{getattr(a, attr):.1e}")
            lines.append(f"| {method} | {metric} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_report(records, fmt: str) -> str:
    """Format ``records`` as ``csv``, ``json`` or ``markdown`` text.

    CSV holds exactly the columns in :data:`CSV_COLUMNS`; JSON carries every
    field plus ``"schema"``; markdown has one error row and one time row per
    method with a column per benchmark.
    """
    records = sorted(records, key=_sort_key)
    if not records:
        raise ValueError("no records to report")
    if fmt in ("markdown", "md"):
        return _markdown(records)
    buf = io.StringIO()
    if fmt == "csv":
        _write_csv(records, buf)
    elif fmt == "json":
        _write_json(records, buf)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return buf.getvalue()


def emit_report(records, fmt: str, path) -> Path:
    """Write :func:`render_report` output to ``path`` and return the path."""
    text = render_report(records, fmt)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return path


def load_records(path) -> list[ExperimentRecord]:
    """Read records written by :func:`emit_report` as JSON or CSV.

    CSV keeps only the report columns; the other fields take their defaults.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {data.get('schema')!r} in {path}")
        return [ExperimentRecord(**r) for r in data["records"]]
    rows = list(csv.DictReader(text.splitlines()))
    if not rows or list(rows[0].keys()) != CSV_COLUMNS:
        raise ValueError(f"{path} is not a results CSV")
    return [ExperimentRecord(r["benchmark"], int(r["d"]), r["method"], int(r["seed"]),
                             float(r["error"]), float(r["time_s"]), int(r["evals"]))
            for r in rows]
