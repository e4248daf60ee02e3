"""Gradient-free grid optimization with maxvol cross sweeps over (quantized) tensor grids."""
from .benchmarks import BenchmarkSpec, catalog, evaluate
from .errors import (BudgetExhausted, DigitOutOfRange, DomainError, IndexOutOfRange,
                     IterationLimitWarning, NotQuantized, ObjectiveError, SingularMatrix,
                     TTOptError, UnknownBenchmark)
from .grid import GridSpec
from .maxvol import MaxvolResult, maxvol, rect_maxvol
from .optimizer import (ObjectiveAdapter, OptimizerConfig, OptResult, maximize, minimize, optimize,
                        suggest_rank)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec", "catalog", "evaluate", "GridSpec", "MaxvolResult", "maxvol", "rect_maxvol",
    "ObjectiveAdapter", "OptimizerConfig", "OptResult", "minimize", "maximize", "optimize",
    "suggest_rank", "TTOptError", "SingularMatrix", "IterationLimitWarning", "IndexOutOfRange",
    "DigitOutOfRange", "NotQuantized", "DomainError", "UnknownBenchmark", "BudgetExhausted",
    "ObjectiveError",
]
