"""Benchmark suite runner, performance profiles, and CSV emitters.

The default suite holds 30 problem instances: the six scalable families at
n in {10, 20, 30}, plus the four fixed-dimension problems at their
canonical starting points and at the classical harder variants with the
start scaled by 10 and by 100.

Profiles follow the Dolan-More construction: per problem, each method's
cost is divided by the best cost among the methods that converged; a
method's curve value at tau is the fraction of problems it solved within
factor tau of the best.  Failed cells get an infinite ratio and are never
counted.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import IncompleteGridError, InvalidSuiteError
from .problems import registry_lookup
from .solver import METHODS, SolverConfig, solve

DEFAULT_TAU_GRID = tuple(np.logspace(0.0, math.log10(32.0), 50))

PROFILE_METRICS = ("iterations", "fevals")

RESULTS_HEADER = ("problem", "n", "method", "status", "iterations", "fevals", "f_norm_final", "wall_time_ms")


@dataclass
class RunRecord:
    problem: str
    n: int
    method: str
    status: str
    iterations: int
    fevals: int
    f_norm_final: float
    wall_time_ms: float


@dataclass
class ProfileTable:
    taus: list[float]
    methods: list[str]
    values: dict[str, list[float]]

    def __post_init__(self) -> None:
        for m in self.methods:
            col = self.values[m]
            if len(col) != len(self.taus):
                raise ValueError(f"profile column for {m} does not match the tau grid")
            if any(not 0.0 <= v <= 1.0 for v in col):
                raise ValueError(f"profile values for {m} fall outside [0, 1]")
            if any(a > b for a, b in zip(col, col[1:])):
                raise ValueError(f"profile for {m} is not nondecreasing")


def default_suite() -> list[tuple[str, int]]:
    """The 30-instance benchmark suite."""
    suite: list[tuple[str, int]] = []
    for name in (
        "brown-almost-linear",
        "broyden-bounded",
        "broyden-tridiagonal",
        "discrete-boundary-value",
        "discrete-integral",
        "trigonometric",
    ):
        suite.extend((name, n) for n in (10, 20, 30))
    for name, n in (
        ("powell-singular", 4),
        ("helical-valley", 3),
        ("powell-badly-scaled", 2),
        ("rosenbrock", 2),
    ):
        suite.append((name, n))
        suite.append((f"{name}-x10", n))
        suite.append((f"{name}-x100", n))
    return suite


def _run_cell(name: str, n: int, method: str, config: SolverConfig) -> RunRecord:
    problem = registry_lookup(name, n)
    begin = time.perf_counter()
    rep = solve(problem, method, config)
    elapsed_ms = (time.perf_counter() - begin) * 1e3
    return RunRecord(
        problem=name,
        n=n,
        method=method,
        status=rep.status,
        iterations=rep.iterations,
        fevals=rep.fevals,
        f_norm_final=rep.f_norm,
        wall_time_ms=elapsed_ms,
    )


def run_suite(
    methods: list[str] | None = None,
    problems: list[tuple[str, int]] | None = None,
    config: SolverConfig | None = None,
    jobs: int = 1,
) -> list[RunRecord]:
    """Run every (problem, method) cell and return records in problem-major,
    method-minor order of the inputs, independent of parallelism.

    Cell-level failures (budget exhaustion, breakdowns, non-finite
    residuals) are recorded in the cell's status; they never abort the
    suite.  Raises InvalidSuiteError for an empty or unresolvable suite
    definition.
    """
    methods = list(methods) if methods is not None else list(METHODS)
    problems = list(problems) if problems is not None else default_suite()
    if not methods or not problems:
        raise InvalidSuiteError("methods and problems must be nonempty")
    for m in methods:
        if m not in METHODS:
            raise InvalidSuiteError(f"unknown method {m!r}")
    if len(set(methods)) != len(methods) or len(set(problems)) != len(problems):
        raise InvalidSuiteError("duplicate suite entries")
    for name, n in problems:
        registry_lookup(name, n)  # fails fast on bad suite entries
    config = config or SolverConfig()
    if jobs < 1:
        raise InvalidSuiteError("jobs must be >= 1")

    cells = [(name, n, method) for name, n in problems for method in methods]
    if jobs == 1:
        return [_run_cell(name, n, method, config) for name, n, method in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_cell, name, n, method, config) for name, n, method in cells]
        return [f.result() for f in futures]


def performance_profile(
    records: list[RunRecord],
    metric: str = "iterations",
    tau_grid: list[float] | None = None,
) -> ProfileTable:
    """Dolan-More performance profile over a complete method-problem grid.

    `metric` is "iterations" or "fevals".  Only cells with status
    "converged" count as solved.  Raises IncompleteGridError when the
    records miss or duplicate a grid cell.
    """
    if metric not in PROFILE_METRICS:
        raise ValueError(f"metric must be one of {PROFILE_METRICS}")
    taus = [float(t) for t in (tau_grid if tau_grid is not None else DEFAULT_TAU_GRID)]
    if not taus or any(t < 1.0 for t in taus) or any(a > b for a, b in zip(taus, taus[1:])):
        raise ValueError("tau grid must be ascending and start at 1 or above")

    methods: list[str] = []
    problems: list[tuple[str, int]] = []
    grid: dict[tuple[tuple[str, int], str], RunRecord] = {}
    for rec in records:
        pkey = (rec.problem, rec.n)
        if pkey not in problems:
            problems.append(pkey)
        if rec.method not in methods:
            methods.append(rec.method)
        cell = (pkey, rec.method)
        if cell in grid:
            raise IncompleteGridError(f"duplicate cell {cell}")
        grid[cell] = rec
    missing = [
        (p, m) for p in problems for m in methods if (p, m) not in grid
    ]
    if missing:
        raise IncompleteGridError(f"missing cells: {missing[:4]}")

    ratios: dict[str, list[float]] = {m: [] for m in methods}
    for pkey in problems:
        costs = {
            m: float(getattr(grid[(pkey, m)], metric))
            for m in methods
            if grid[(pkey, m)].status == "converged"
        }
        best = min(costs.values()) if costs else math.inf
        for m in methods:
            if m not in costs:
                ratios[m].append(math.inf)
            elif best == 0.0:
                ratios[m].append(1.0 if costs[m] == 0.0 else math.inf)
            else:
                ratios[m].append(costs[m] / best)

    total = len(problems)
    values = {
        m: [sum(1 for r in ratios[m] if r <= tau) / total for tau in taus]
        for m in methods
    }
    return ProfileTable(taus=taus, methods=methods, values=values)


def emit_results(records: list[RunRecord], path: str) -> None:
    """Write run records as CSV with the fixed header; residual norms use
    scientific notation with six significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in records:
            writer.writerow(
                (
                    r.problem,
                    r.n,
                    r.method,
                    r.status,
                    r.iterations,
                    r.fevals,
                    f"{r.f_norm_final:.5e}",
                    f"{r.wall_time_ms:.3f}",
                )
            )


def emit_profile(table: ProfileTable, path: str) -> None:
    """Write a profile as CSV: one tau column, one column per method."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau"] + list(table.methods))
        for i, tau in enumerate(table.taus):
            writer.writerow(
                [f"{tau:.6g}"] + [f"{table.values[m][i]:.6f}" for m in table.methods]
            )
