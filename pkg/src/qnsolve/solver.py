"""Quasi-Newton driver for square nonlinear systems.

Four methods share one driver and differ only in their direction memory:

- qn1: classical Broyden updates.
- qn2: multipoint secant updates with memory restarts.
- qn3: multipoint secant updates with memory pruning.
- qn4: interpolation updates over recent iterates.

Globalization is a derivative-free nonmonotone backtracking line search: a
full step is taken outright when it contracts the residual norm by a fixed
factor, otherwise the step fraction shrinks geometrically until the
residual passes a relaxed descent test whose slack eta_k is summable, so
the residual norms stay inside an exp(sum eta) envelope of the initial one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import (
    LineSearchFailedError,
    NonFiniteResultError,
    SingularMatrixError,
    UpdateSkipped,
    ZeroStepError,
    ZeroVectorError,
)
from .memory import (
    BroydenMemory,
    InterpolationMemory,
    SecantMemory,
    zero_step_floor,
)
from .problems import ProblemSpec
from .update import (
    DEFAULT_THETA_BAR,
    JacobianApprox,
    choose_theta,
    newton_direction,
    rank_one_update,
)

METHODS = ("qn1", "qn2", "qn3", "qn4")

B0_POLICIES = ("identity", "scaled-identity", "finite-difference")

STATUSES = (
    "converged",
    "max_iter",
    "max_feval",
    "line_search_failed",
    "singular_unrecoverable",
    "nonfinite",
)


def default_eta(k: int, f0_norm: float) -> float:
    """Summable nonmonotone slack: f0_norm / (k+1)^2, total f0_norm * pi^2 / 6."""
    return f0_norm / (k + 1.0) ** 2


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 500
    max_feval: int = 2000
    sigma: float = 0.1
    sigma1: float = 1e-3
    sigma2: float = 1e-3
    rho: float = 0.9
    beta: float = 0.1
    theta_bar: float = DEFAULT_THETA_BAR
    lambda_min: float = 1e-12
    memory_depth: int | None = None
    b0: str = "identity"
    eta_schedule: Callable[[int, float], float] = default_eta
    theta_fixed: float | None = None
    max_resets: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("sigma1 and sigma2 must be positive")
        if self.b0 not in B0_POLICIES:
            raise ValueError(f"b0 must be one of {B0_POLICIES}")
        if self.tol <= 0.0 or self.lambda_min <= 0.0:
            raise ValueError("tol and lambda_min must be positive")


@dataclass
class IterationRecord:
    k: int
    f_norm: float
    step_norm: float
    lam: float
    theta: float | None
    memory_size: int
    full_step: bool
    eta: float
    update_skipped: bool = False


@dataclass
class SolveReport:
    status: str
    x: np.ndarray
    f_norm: float
    f0_norm: float
    iterations: int
    fevals: int
    restarts: int
    trace: list[IterationRecord] = field(default_factory=list)


@dataclass
class UpdateSnapshot:
    """Post-commit state handed to a solve() observer, for diagnostics."""

    k: int
    theta: float
    s: np.ndarray
    y: np.ndarray
    c: np.ndarray
    b_matrix: np.ndarray
    secant_pairs: list | None
    points: list | None
    det_bound: float


def full_step_test(
    f_norm: float,
    f_trial_norm: float,
    step_norm: float,
    rho: float = 0.9,
    sigma2: float = 1e-3,
) -> bool:
    """Accept the unit step when it contracts the residual enough outright."""
    return f_trial_norm <= rho * f_norm - sigma2 * step_norm**2


class _BudgetExhausted(Exception):
    pass


def backtrack_line_search(
    evaluate: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    p: np.ndarray,
    f_norm: float,
    eta: float,
    sigma1: float = 1e-3,
    beta: float = 0.1,
    lambda_min: float = 1e-12,
    first_trial: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Find the first lam in {1, beta, beta^2, ...} passing the relaxed test

        ||F(x + lam p)|| <= ||F(x)|| - sigma1 ||lam p||^2 + eta ||F(x)||

    Returns (lam, x_trial, f_trial).  `first_trial` lets the caller pass an
    already-evaluated (x + p, F(x + p)) so the unit step is not recomputed.
    Raises LineSearchFailedError once lam falls below lambda_min.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    p_norm = float(np.linalg.norm(p))
    if p_norm == 0.0:
        raise ValueError("zero search direction")
    lam = 1.0
    while lam >= lambda_min:
        if lam == 1.0 and first_trial is not None:
            x_trial, f_trial = first_trial
        else:
            x_trial = x + lam * p
            f_trial = evaluate(x_trial)
        bound = f_norm - sigma1 * (lam * p_norm) ** 2 + eta * f_norm
        if float(np.linalg.norm(f_trial)) <= bound:
            return lam, x_trial, f_trial
        lam *= beta
    raise LineSearchFailedError(f"no acceptable step above {lambda_min:.1e}")


def _make_memory(method: str, n: int, sigma: float, depth: int | None):
    if method == "qn1":
        return BroydenMemory()
    if method == "qn2":
        return SecantMemory(n, sigma, depth, variant="restart")
    if method == "qn3":
        return SecantMemory(n, sigma, depth, variant="pruning")
    if method == "qn4":
        return InterpolationMemory(n, sigma, depth)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _fd_jacobian(evaluate, x: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = x.size
    jac = np.empty((n, n))
    for j in range(n):
        h = math.sqrt(np.finfo(float).eps) * max(abs(x[j]), 1.0)
        xs = x.copy()
        xs[j] += h
        jac[:, j] = (evaluate(xs) - f) / h
    return jac


def _initial_approx(cfg: SolverConfig, evaluate, x: np.ndarray, f: np.ndarray) -> JacobianApprox:
    n = x.size
    if cfg.b0 == "scaled-identity":
        scale = float(np.linalg.norm(f))
        return JacobianApprox((scale if scale > 0.0 else 1.0) * np.eye(n))
    if cfg.b0 == "finite-difference":
        try:
            return JacobianApprox(_fd_jacobian(evaluate, x, f))
        except SingularMatrixError:
            return JacobianApprox(np.eye(n))
    return JacobianApprox(np.eye(n))


def solve(
    problem: ProblemSpec,
    method: str = "qn1",
    config: SolverConfig | None = None,
    observer: Callable[[UpdateSnapshot], None] | None = None,
) -> SolveReport:
    """Run one quasi-Newton solve on the given problem.

    The run stops at the relative residual criterion
    ||F|| <= tol * max(||F(x0)||, 1), or with a budget / breakdown status.
    All arithmetic is deterministic: repeated runs on a fresh ProblemSpec
    give bit-identical reports.
    """
    cfg = config or SolverConfig()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    n = problem.dimension
    fevals_start = problem.fevals

    def evaluate(pt: np.ndarray) -> np.ndarray:
        if problem.fevals - fevals_start >= cfg.max_feval:
            raise _BudgetExhausted
        return problem.evaluate(pt)

    def report(status: str, x, f_norm, f0_norm, k, restarts, trace) -> SolveReport:
        return SolveReport(
            status=status,
            x=x,
            f_norm=f_norm,
            f0_norm=f0_norm,
            iterations=k,
            fevals=problem.fevals - fevals_start,
            restarts=restarts,
            trace=trace,
        )

    x = problem.x0.astype(float).copy()
    trace: list[IterationRecord] = []
    try:
        f = evaluate(x)
    except NonFiniteResultError:
        return report("nonfinite", x, math.inf, math.inf, 0, 0, trace)
    f0_norm = float(np.linalg.norm(f))
    stop_tol = cfg.tol * max(f0_norm, 1.0)

    try:
        approx = _initial_approx(cfg, evaluate, x, f)
    except _BudgetExhausted:
        return report("max_feval", x, f0_norm, f0_norm, 0, 0, trace)
    except NonFiniteResultError:
        return report("nonfinite", x, f0_norm, f0_norm, 0, 0, trace)

    mem = _make_memory(method, n, cfg.sigma, cfg.memory_depth)
    if isinstance(mem, InterpolationMemory):
        mem.start(0, x, f)

    restarts = 0
    k = 0
    while True:
        f_norm = float(np.linalg.norm(f))
        if f_norm <= stop_tol:
            return report("converged", x, f_norm, f0_norm, k, restarts, trace)
        if k >= cfg.max_iter:
            return report("max_iter", x, f_norm, f0_norm, k, restarts, trace)

        p = newton_direction(approx, f)
        p_norm = float(np.linalg.norm(p))

        try:
            x_unit = x + p
            f_unit = evaluate(x_unit)
        except _BudgetExhausted:
            return report("max_feval", x, f_norm, f0_norm, k, restarts, trace)
        except NonFiniteResultError:
            return report("nonfinite", x, f_norm, f0_norm, k, restarts, trace)

        eta_k = cfg.eta_schedule(k, f0_norm)
        if full_step_test(f_norm, float(np.linalg.norm(f_unit)), p_norm, cfg.rho, cfg.sigma2):
            lam, x_new, f_new, full_step = 1.0, x_unit, f_unit, True
        else:
            full_step = False
            try:
                lam, x_new, f_new = backtrack_line_search(
                    evaluate,
                    x,
                    p,
                    f_norm,
                    eta_k,
                    sigma1=cfg.sigma1,
                    beta=cfg.beta,
                    lambda_min=cfg.lambda_min,
                    first_trial=(x_unit, f_unit),
                )
            except LineSearchFailedError:
                return report("line_search_failed", x, f_norm, f0_norm, k, restarts, trace)
            except _BudgetExhausted:
                return report("max_feval", x, f_norm, f0_norm, k, restarts, trace)
            except NonFiniteResultError:
                return report("nonfinite", x, f_norm, f0_norm, k, restarts, trace)

        s = x_new - x
        y = f_new - f

        # Remember the memory state so a skipped or singular update leaves
        # it untouched.
        if isinstance(mem, InterpolationMemory):
            saved = list(mem.points)
        elif isinstance(mem, SecantMemory):
            saved = list(mem.pairs)
        else:
            saved = None
        saved_bound = mem.last_det_bound if isinstance(mem, SecantMemory) else 1.0

        theta: float | None = None
        skipped = False
        needs_reset = False
        try:
            if isinstance(mem, InterpolationMemory):
                c = mem.update(k, x_new, f_new)
            else:
                c = mem.update(k, s, y, floor=zero_step_floor(x))
            theta = choose_theta(
                approx, s, y, c,
                theta_bar=cfg.theta_bar,
                fixed=cfg.theta_fixed,
            )
            approx = rank_one_update(approx, s, y, c, theta)
        except ZeroStepError:
            skipped = True
        except (UpdateSkipped, ZeroVectorError):
            skipped = True
            theta = None
            if isinstance(mem, InterpolationMemory):
                mem.points = saved
            elif isinstance(mem, SecantMemory):
                mem.pairs = saved
                mem.last_det_bound = saved_bound
        except SingularMatrixError:
            skipped = True
            theta = None
            needs_reset = True

        if skipped and not needs_reset and isinstance(mem, InterpolationMemory):
            # the stored manifold no longer reaches the new iterate; restart
            # the history there so the next update has its anchor
            mem.start(k + 1, x_new, f_new)

        if needs_reset:
            if restarts >= cfg.max_resets:
                return report(
                    "singular_unrecoverable",
                    x_new,
                    float(np.linalg.norm(f_new)),
                    f0_norm,
                    k + 1,
                    restarts,
                    trace,
                )
            restarts += 1
            try:
                approx = _initial_approx(cfg, evaluate, x_new, f_new)
            except _BudgetExhausted:
                return report("max_feval", x_new, float(np.linalg.norm(f_new)), f0_norm, k + 1, restarts, trace)
            except NonFiniteResultError:
                return report("nonfinite", x_new, float(np.linalg.norm(f_new)), f0_norm, k + 1, restarts, trace)
            if isinstance(mem, InterpolationMemory):
                mem.start(k + 1, x_new, f_new)
            else:
                mem.reset()

        if observer is not None and not skipped:
            observer(
                UpdateSnapshot(
                    k=k,
                    theta=theta,
                    s=s.copy(),
                    y=y.copy(),
                    c=c.copy(),
                    b_matrix=approx.matrix.copy(),
                    secant_pairs=list(mem.pairs) if isinstance(mem, SecantMemory) else None,
                    points=list(mem.points) if isinstance(mem, InterpolationMemory) else None,
                    det_bound=mem.last_det_bound if isinstance(mem, SecantMemory) else 1.0,
                )
            )

        trace.append(
            IterationRecord(
                k=k,
                f_norm=f_norm,
                step_norm=float(np.linalg.norm(s)),
                lam=lam,
                theta=theta,
                memory_size=mem.size,
                full_step=full_step,
                eta=eta_k,
                update_skipped=skipped,
            )
        )
        x, f = x_new, f_new
        k += 1
