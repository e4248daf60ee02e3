"""Gradient-free minimization over a grid by alternating maxvol cross sweeps.

The objective on a (possibly quantized) grid is an implicit tensor. Each
step of a sweep evaluates a small cross of that tensor -- the selected left
multi-indices, every value of one mode, and the selected right
multi-indices -- maps the values so the current minimum becomes the largest
entry, and re-selects the left or right multi-indices with ``rect_maxvol``
on the QR factor of the resulting unfolding.

Index sets are integer arrays with one row per selected multi-index. A left
(prefix) set at interface ``k`` has ``k`` columns (modes ``0..k-1``); a right
(suffix) set at interface ``k`` has ``D - k`` columns (modes ``k..D-1``). The
boundaries hold a single empty row, shape ``(1, 0)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted, IndexOutOfRange, ObjectiveError, SingularMatrix
from .grid import GridSpec
from .linalg import qr_thin
from .maxvol import maxvol, rect_maxvol

__all__ = [
    "ObjectiveAdapter",
    "OptimizerConfig",
    "OptResult",
    "effective_ranks",
    "init_index_sets",
    "update_right",
    "update_left",
    "eval_block",
    "minimize",
    "maximize",
    "optimize",
    "suggest_rank",
]

log = logging.getLogger(__name__)

_INIT_RETRIES = 5


def _empty_set():
    return np.zeros((1, 0), dtype=np.int64)


def _as_set(x):
    if x is None:
        return _empty_set()
    x = np.asarray(x, dtype=np.int64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


class ObjectiveAdapter:
    """Batched objective with an evaluation budget and best-so-far tracking.

    ``fn`` maps an ``(m, d)`` array of coordinates to ``m`` values and must
    return them in input order.

    With ``cache=True`` every grid point is sent to ``fn`` at most once;
    repeated points are answered from memory and do not count against the
    budget. ``requests`` counts all points asked for, cached or not, and
    ``duplicates`` how many of them were repeats.
    """

    def __init__(self, fn, budget: int, *, cache: bool = True):
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        self.fn = fn
        self.budget = int(budget)
        self.cache = cache
        self.eval_count = 0
        self.requests = 0
        self.duplicates = 0
        self.best_value = math.inf
        self.best_indices = None
        self.best_coords = None
        self.trace: list[tuple[int, float]] = []
        self._values: dict = {}
        self._mult = None

    @property
    def exhausted(self) -> bool:
        return self.eval_count >= self.budget

    def _keys(self, indices):
        # two independent multiplicative hashes mod 2**64; collisions ~2**-128
        idx = np.ascontiguousarray(indices, dtype=np.int64).view(np.uint64)
        if self._mult is None or self._mult.shape[0] != idx.shape[1]:
            rng = np.random.default_rng(0x5EED)
            self._mult = rng.integers(1, 2**63, size=(idx.shape[1], 2), dtype=np.uint64) * 2 + 1
        h = idx @ self._mult
        return list(zip(h[:, 0].tolist(), h[:, 1].tolist()))

    def __call__(self, indices, coords) -> np.ndarray:
        if self.exhausted:
            raise BudgetExhausted(f"budget of {self.budget} evaluations is spent")
        indices = np.asarray(indices)
        coords = np.asarray(coords, dtype=float)
        m = coords.shape[0]
        self.requests += m
        if self.cache:
            keys = self._keys(indices)
            first = {}
            for pos, key in enumerate(keys):
                if key not in self._values and key not in first:
                    first[key] = pos
            fresh = np.fromiter(first.values(), dtype=np.int64, count=len(first))
            self.duplicates += m - fresh.size
        else:
            fresh = np.arange(m)
        if fresh.size:
            y_new = np.asarray(self.fn(coords[fresh]), dtype=float).reshape(-1)
            if y_new.shape[0] != fresh.size:
                raise ValueError(f"objective returned {y_new.shape[0]} values for {fresh.size} points")
            self.eval_count += fresh.size
            if not np.all(np.isfinite(y_new)):
                raise ObjectiveError(
                    f"objective returned {np.count_nonzero(~np.isfinite(y_new))} non-finite values")
        if self.cache:
            for pos, v in zip(fresh.tolist(), y_new.tolist() if fresh.size else []):
                self._values[keys[pos]] = v
            y = np.array([self._values[k] for k in keys])
        else:
            y = y_new
        k = int(np.argmin(y))
        if y[k] < self.best_value:
            self.best_value = float(y[k])
            self.best_indices = np.array(indices[k], dtype=np.int64)
            self.best_coords = np.array(coords[k], dtype=float)
            self.trace.append((self.eval_count, self.best_value))
        return y


@dataclass
class OptimizerConfig:
    """Run parameters.

    ``extra_rows`` is the most rows ``rect_maxvol`` may add on top of the
    interface rank; ``None`` means as many as the rank itself.
    ``max_sweeps=None`` lets the budget decide when to stop.
    ``keep_best`` re-inserts the prefix/suffix of the best point found so
    far into every freshly selected index set. ``cache`` answers repeated
    points from memory so the budget counts distinct objective calls only.
    ``patience`` stops the run after that many consecutive sweeps without
    a better value (``None`` disables the check).
    """

    rank: int = 4
    budget: int = 100_000
    min_sweeps: int = 1
    max_sweeps: int | None = None
    eps: float = 1.01
    tau: float = 1.0
    extra_rows: int | None = None
    seed: int = 0
    maximize: bool = False
    keep_best: bool = True
    cache: bool = True
    patience: int | None = 8

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.eps < 1.0:
            raise ValueError(f"eps must be >= 1, got {self.eps}")
        if self.tau < 1.0:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1 or None")
        if self.extra_rows is not None and self.extra_rows < 0:
            raise ValueError("extra_rows must be >= 0 or None")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1 or None")


@dataclass
class OptResult:
    best_value: float
    best_indices: np.ndarray
    best_coords: np.ndarray
    evaluations_used: int
    sweeps_completed: int
    trace: list = field(default_factory=list)
    status: str = "budget"
    requests: int = 0
    duplicates: int = 0


def effective_ranks(shape, r_max: int) -> list[int]:
    """Interface ranks ``R_0..R_D`` capped by ``r_max`` and both unfoldings.

    The forward pass enforces ``R_k <= R_{k-1} * N_{k-1}``, the backward pass
    ``R_k <= N_k * R_{k+1}``; ``R_0 = R_D = 1``.
    """
    shape = [int(n) for n in shape]
    if not shape:
        raise ValueError("shape must be non-empty")
    d = len(shape)
    ranks = [1] * (d + 1)
    for k in range(1, d):
        ranks[k] = min(ranks[k - 1] * shape[k - 1], r_max)
    for k in range(d - 1, 0, -1):
        ranks[k] = min(ranks[k], shape[k] * ranks[k + 1])
    return ranks


def update_right(x_prev, mode_size: int, rank: int | None, selected) -> np.ndarray:
    """Extend left multi-indices by one mode and keep the ``selected`` rows.

    Flat position ``s`` stands for ``(x_prev[s % rank], s // rank)``: rows of
    ``x_prev`` vary fastest.
    """
    x = _as_set(x_prev)
    if rank is None:
        rank = x.shape[0]
    if rank != x.shape[0]:
        raise ValueError(f"rank {rank} does not match {x.shape[0]} rows in x_prev")
    sel = np.asarray(selected, dtype=np.int64).reshape(-1)
    if np.any(sel < 0) or np.any(sel >= rank * mode_size):
        raise IndexOutOfRange(f"selected index out of range [0, {rank * mode_size})")
    return np.hstack([x[sel % rank], (sel // rank)[:, None]])


def update_left(x_next, mode_size: int, rank: int | None, selected) -> np.ndarray:
    """Prepend one mode to right multi-indices and keep the ``selected`` rows.

    Flat position ``s`` stands for ``(s % mode_size, x_next[s // mode_size])``:
    the mode index varies fastest.
    """
    x = _as_set(x_next)
    if rank is None:
        rank = x.shape[0]
    if rank != x.shape[0]:
        raise ValueError(f"rank {rank} does not match {x.shape[0]} rows in x_next")
    sel = np.asarray(selected, dtype=np.int64).reshape(-1)
    if np.any(sel < 0) or np.any(sel >= rank * mode_size):
        raise IndexOutOfRange(f"selected index out of range [0, {rank * mode_size})")
    return np.hstack([(sel % mode_size)[:, None], x[sel // mode_size]])


def init_index_sets(shape, ranks, seed: int) -> list[np.ndarray]:
    """Random left index sets ``X_0..X_D`` (boundaries are empty sets).

    Interface ``k`` draws from its own generator keyed by ``(seed, k)`` so
    the sets for the first modes do not depend on how many modes follow.
    """
    d = len(shape)
    sets = [_empty_set() for _ in range(d + 1)]
    for k in range(d - 1):
        rows, cols = ranks[k] * shape[k], ranks[k + 1]
        for attempt in range(_INIT_RETRIES + 1):
            rng = np.random.default_rng([seed, k, attempt])
            q, _ = qr_thin(rng.standard_normal((rows, cols)))
            try:
                sel = maxvol(q).row_indices
                break
            except SingularMatrix:
                if attempt == _INIT_RETRIES:
                    raise
        sets[k + 1] = update_right(sets[k], shape[k], ranks[k], sel)
    return sets


def block_points(left, mode_size: int, right) -> np.ndarray:
    """All ``(left row, mode index, right row)`` triples, left varying fastest."""
    left = _as_set(left)
    right = _as_set(right)
    rl, rr = left.shape[0], right.shape[0]
    mid = np.tile(np.repeat(np.arange(mode_size, dtype=np.int64), rl), rr)
    return np.hstack([
        np.tile(left, (mode_size * rr, 1)),
        mid[:, None],
        np.repeat(right, rl * mode_size, axis=0),
    ])


def eval_block(left, mode: int, right, spec: GridSpec, obj: ObjectiveAdapter,
               mode_size: int | None = None, return_values: bool = False):
    """Evaluate the cross at ``mode`` and return the mapped values.

    The mapping ``pi/2 - atan(y - J_min)`` uses the best value *after* this
    block has been taken into account, so every mapped value lies in
    ``(0, pi/2]`` and the largest one marks the smallest ``y``.
    """
    if mode_size is None:
        mode_size = spec.tensor_shape[mode]
    left, right = _as_set(left), _as_set(right)
    # same rows as block_points, summed per part instead of decoding d*q digits
    lc = spec.partial_indices(left, 0)
    mc = spec.partial_indices(np.arange(mode_size)[:, None], mode)
    rc = spec.partial_indices(right, mode + 1)
    grid_idx = (rc[:, None, None, :] + mc[None, :, None, :] + lc[None, None, :, :]).reshape(-1, spec.dims)
    y = obj(grid_idx, spec.coords(grid_idx, check=False))
    z = np.pi / 2 - np.arctan(y - obj.best_value)
    return (z, y) if return_values else z


def _select_rows(mat, cap: int, cfg: OptimizerConfig) -> np.ndarray:
    q, _ = qr_thin(mat, check_finite=False)
    k = min(cap, q.shape[1])
    q = q[:, :k]
    extra = k if cfg.extra_rows is None else cfg.extra_rows
    max_rows = min(k + extra, q.shape[0])
    return rect_maxvol(q, tau=cfg.tau, max_rows=max_rows, eps=cfg.eps).row_indices


def _keep(rows, part, limit):
    """Put ``part`` first in ``rows`` unless present; drop the last row past ``limit``."""
    if part is None or np.any(np.all(rows == part, axis=1)):
        return rows
    return np.vstack([part[None, :], rows])[:limit]


def _result(obj: ObjectiveAdapter, sweeps: int, status: str) -> OptResult:
    return OptResult(
        best_value=obj.best_value,
        best_indices=obj.best_indices,
        best_coords=obj.best_coords,
        evaluations_used=obj.eval_count,
        sweeps_completed=sweeps,
        trace=list(obj.trace),
        status=status,
        requests=obj.requests,
        duplicates=obj.duplicates,
    )


def _state_key(sets, best_value):
    # a sweep is a deterministic function of the index sets and the best value
    return (best_value,) + tuple((x.shape, x.tobytes()) for x in sets)


def minimize(obj, spec: GridSpec, cfg: OptimizerConfig, *, block_hook=None) -> OptResult:
    """Search the grid for the smallest objective value.

    Parameters
    ----------
    obj : ObjectiveAdapter or callable
        A bare callable is wrapped with ``cfg.budget``.
    spec : GridSpec
        The grid; quantized grids are swept over their ``d*q`` binary-like
        modes.
    cfg : OptimizerConfig
    block_hook : callable, optional
        Called as ``block_hook(y, z)`` after every evaluated block.

    Returns
    -------
    OptResult
        ``status`` is ``"budget"``, ``"max_sweeps"`` or ``"converged"``. A
        run converges when a sweep ends in a state (index sets and best
        value) some earlier sweep started from; the run would then cycle. ``"stalled"`` means ``cfg.patience``
        sweeps in a row brought no better value.

    Raises
    ------
    ObjectiveError
        If the objective returns NaN/Inf; ``err.result`` holds the partial
        result.
    """
    if not isinstance(obj, ObjectiveAdapter):
        obj = ObjectiveAdapter(obj, cfg.budget, cache=cfg.cache)
    shape = spec.tensor_shape
    d = len(shape)
    caps = effective_ranks(shape, cfg.rank)
    sets = init_index_sets(shape, caps, cfg.seed)
    sweeps = 0
    idle = 0
    seen = set()

    memo = {}

    def best_point():
        if not cfg.keep_best or obj.best_indices is None:
            return None
        if memo.get("n") != len(obj.trace):
            idx = obj.best_indices[None, :]
            memo["n"] = len(obj.trace)
            memo["point"] = (spec.indices_to_digits(idx) if spec.quantized else idx)[0]
        return memo["point"]

    def limit(cap):
        return cap + (cap if cfg.extra_rows is None else cfg.extra_rows)

    def step(k):
        z, y = eval_block(sets[k], k, sets[k + 1], spec, obj, shape[k], return_values=True)
        if block_hook is not None:
            block_hook(y, z)
        return z

    try:
        while cfg.max_sweeps is None or sweeps < cfg.max_sweeps:
            best_before = obj.best_value
            seen.add(_state_key(sets, obj.best_value))
            for k in range(d - 1, -1, -1):
                z = step(k)
                if obj.exhausted:
                    return _result(obj, sweeps, "budget")
                if k > 0:
                    rl, rr = sets[k].shape[0], sets[k + 1].shape[0]
                    mat = z.reshape((rl, shape[k] * rr), order="F").T
                    sel = _select_rows(mat, caps[k], cfg)
                    sets[k] = update_left(sets[k + 1], shape[k], rr, sel)
                    best = best_point()
                    if best is not None:
                        sets[k] = _keep(sets[k], best[k:], limit(caps[k]))
            for k in range(d):
                z = step(k)
                if obj.exhausted:
                    return _result(obj, sweeps, "budget")
                if k < d - 1:
                    rl, rr = sets[k].shape[0], sets[k + 1].shape[0]
                    mat = z.reshape((rl * shape[k], rr), order="F")
                    sel = _select_rows(mat, caps[k + 1], cfg)
                    sets[k + 1] = update_right(sets[k], shape[k], rl, sel)
                    best = best_point()
                    if best is not None:
                        sets[k + 1] = _keep(sets[k + 1], best[:k + 1], limit(caps[k + 1]))
            sweeps += 1
            log.debug("sweep %d: %d evaluations, best %.6g", sweeps, obj.eval_count, obj.best_value)
            if sweeps >= cfg.min_sweeps and _state_key(sets, obj.best_value) in seen:
                return _result(obj, sweeps, "converged")
            idle = idle + 1 if obj.best_value == best_before else 0
            if cfg.patience is not None and idle >= cfg.patience:
                return _result(obj, sweeps, "stalled")
    except ObjectiveError as err:
        err.result = _result(obj, sweeps, "objective_error")
        raise
    return _result(obj, sweeps, "max_sweeps")


def maximize(obj, spec: GridSpec, cfg: OptimizerConfig, **kwargs) -> OptResult:
    """Search for the largest value by minimizing the negated objective.

    The returned ``best_value`` and trace values carry the original sign.
    """
    fn = obj.fn if isinstance(obj, ObjectiveAdapter) else obj
    budget = obj.budget if isinstance(obj, ObjectiveAdapter) else cfg.budget
    cache = obj.cache if isinstance(obj, ObjectiveAdapter) else cfg.cache
    inner = ObjectiveAdapter(lambda x: -np.asarray(fn(x), dtype=float), budget, cache=cache)
    try:
        res = minimize(inner, spec, cfg, **kwargs)
    except ObjectiveError as err:
        if err.result is not None:
            _negate(err.result)
        raise
    return _negate(res)


def _negate(res: OptResult) -> OptResult:
    res.best_value = -res.best_value
    res.trace = [(n, -v) for n, v in res.trace]
    return res


def optimize(fn, spec: GridSpec, cfg: OptimizerConfig, **kwargs) -> OptResult:
    """Dispatch to :func:`maximize` or :func:`minimize` per ``cfg.maximize``."""
    return (maximize if cfg.maximize else minimize)(fn, spec, cfg, **kwargs)


def suggest_rank(m: int, d: int, q: int, p: int, t: int = 5) -> int:
    """Largest rank for which ``t`` sweeps fit into ``m`` evaluations.

    One sweep over ``d*q`` modes of size ``p`` at rank ``R`` costs about
    ``2*d*q*p*R**2`` evaluations.
    """
    for name, v in (("m", m), ("d", d), ("q", q), ("p", p), ("t", t)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    return max(1, math.isqrt(int(m) // (2 * t * d * q * p)))
