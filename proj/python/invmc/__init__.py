"""Regression Monte Carlo for controlled inventories (C++ core)."""

import json as _json

from ._invmc import (
    Algorithm,
    Benchmark,
    EvaluationReport,
    Mode,
    PathSet,
    Policy,
    SolveResult,
    benchmark_names,
    evaluate,
    fit_least_squares,
    myopic,
    set_num_threads,
    solve,
    version,
)
from ._invmc import run_experiment as _run_experiment

__all__ = [
    "Algorithm",
    "Benchmark",
    "EvaluationReport",
    "Mode",
    "PathSet",
    "Policy",
    "SolveResult",
    "benchmark_names",
    "evaluate",
    "fit_least_squares",
    "myopic",
    "run_experiment",
    "set_num_threads",
    "solve",
    "version",
]


def run_experiment(config, out_dir):
    """Runs an experiment config (dict or JSON text) and returns the result rows."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _run_experiment(text, str(out_dir))
