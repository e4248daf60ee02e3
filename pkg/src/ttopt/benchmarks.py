"""Analytic test functions F1-F10 with their search boxes and global minima.

Every function takes an ``(m, d)`` array of points (a single point may be
passed as a 1-D array) and returns ``m`` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, UnknownBenchmark

__all__ = ["BenchmarkSpec", "catalog", "get", "evaluate", "MICHALEWICZ_M"]

#: Exponent of the Michalewicz function; 10 is the usual choice and the one
#: the d=10 minimum of -9.66015 refers to.
MICHALEWICZ_M = 10


def _points(x):
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def ackley(x, a=20.0, b=0.2, c=2 * np.pi):
    x = _points(x)
    d = x.shape[1]
    s1 = np.sqrt(np.sum(x**2, axis=1) / d)
    s2 = np.sum(np.cos(c * x), axis=1) / d
    return -a * np.exp(-b * s1) - np.exp(s2) + a + np.e


def alpine(x):
    x = _points(x)
    return np.sum(np.abs(x * np.sin(x) + 0.1 * x), axis=1)


def brown(x):
    x = _points(x)
    x2 = x**2
    return np.sum(x2[:, :-1] ** (x2[:, 1:] + 1) + x2[:, 1:] ** (x2[:, :-1] + 1), axis=1)


def exponential(x):
    x = _points(x)
    return -np.exp(-0.5 * np.sum(x**2, axis=1))


def griewank(x):
    x = _points(x)
    i = np.arange(1, x.shape[1] + 1)
    return np.sum(x**2, axis=1) / 4000 - np.prod(np.cos(x / np.sqrt(i)), axis=1) + 1


def michalewicz(x, m=MICHALEWICZ_M):
    x = _points(x)
    i = np.arange(1, x.shape[1] + 1)
    return -np.sum(np.sin(x) * np.sin(i * x**2 / np.pi) ** (2 * m), axis=1)


def qing(x):
    x = _points(x)
    i = np.arange(1, x.shape[1] + 1)
    return np.sum((x**2 - i) ** 2, axis=1)


def rastrigin(x, a=10.0):
    x = _points(x)
    d = x.shape[1]
    return a * d + np.sum(x**2 - a * np.cos(2 * np.pi * x), axis=1)


def schaffer(x):
    x = _points(x)
    s = x[:, :-1] ** 2 + x[:, 1:] ** 2
    return np.sum(0.5 + (np.sin(np.sqrt(s)) ** 2 - 0.5) / (1 + 0.001 * s) ** 2, axis=1)


def schwefel(x):
    x = _points(x)
    d = x.shape[1]
    return 418.9829 * d - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=1)


@dataclass(frozen=True)
class BenchmarkSpec:
    id: str
    name: str
    lower: float
    upper: float
    known_min: float
    formula: Callable
    minimizer: Callable | None = None
    note: str = ""
    min_dim: int | None = None

    def __call__(self, points):
        return evaluate(self, points)

    def minimum(self, d: int) -> float:
        """Global minimum for dimension ``d`` (NaN where it is not known)."""
        if self.min_dim is not None and d != self.min_dim:
            return float("nan")
        return self.known_min

    def argmin(self, d: int):
        """Known global minimizer for dimension ``d`` (None if unpublished)."""
        return None if self.minimizer is None else np.asarray(self.minimizer(d), dtype=float)


_CATALOG = (
    BenchmarkSpec("F1", "ackley", -32.768, 32.768, 0.0, ackley, lambda d: np.zeros(d)),
    BenchmarkSpec("F2", "alpine", -10.0, 10.0, 0.0, alpine, lambda d: np.zeros(d)),
    BenchmarkSpec("F3", "brown", -1.0, 4.0, 0.0, brown, lambda d: np.zeros(d)),
    BenchmarkSpec("F4", "exponential", -1.0, 1.0, -1.0, exponential, lambda d: np.zeros(d)),
    BenchmarkSpec("F5", "griewank", -600.0, 600.0, 0.0, griewank, lambda d: np.zeros(d)),
    BenchmarkSpec("F6", "michalewicz", 0.0, np.pi, -9.66015, michalewicz, None,
                  note="minimum given for d=10", min_dim=10),
    BenchmarkSpec("F7", "qing", 0.0, 500.0, 0.0, qing,
                  lambda d: np.sqrt(np.arange(1, d + 1))),
    BenchmarkSpec("F8", "rastrigin", -5.12, 5.12, 0.0, rastrigin, lambda d: np.zeros(d)),
    BenchmarkSpec("F9", "schaffer", -100.0, 100.0, 0.0, schaffer, lambda d: np.zeros(d)),
    BenchmarkSpec("F10", "schwefel", -500.0, 500.0, 0.0, schwefel,
                  lambda d: np.full(d, 420.9687)),
)


def catalog() -> list[BenchmarkSpec]:
    return list(_CATALOG)


def get(key: str) -> BenchmarkSpec:
    """Look a benchmark up by id (``"F1"``) or name (``"ackley"``)."""
    k = str(key).strip().lower()
    for spec in _CATALOG:
        if k in (spec.id.lower(), spec.name):
            return spec
    raise UnknownBenchmark(f"unknown benchmark {key!r}; expected F1..F10 or a function name")


def evaluate(spec: BenchmarkSpec, points) -> np.ndarray:
    """Evaluate ``spec`` on a batch of points inside its box.

    Raises
    ------
    DomainError
        If any coordinate lies outside ``[lower, upper]`` (a relative slack
        of 1e-12 of the box width absorbs rounding of grid points).
    """
    x = _points(points)
    slack = 1e-12 * (spec.upper - spec.lower)
    if np.any(x < spec.lower - slack) or np.any(x > spec.upper + slack):
        raise DomainError(f"{spec.id}: points outside [{spec.lower}, {spec.upper}]")
    return spec.formula(x)
