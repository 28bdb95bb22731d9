"""Classical square nonlinear-equation test problems.

The registry holds ten families from the standard unconstrained-testing
literature (Rosenbrock, Powell, Broyden, and the discrete boundary-value /
integral-equation / trigonometric family), each with its canonical starting
point.  Six families are scalable and admit n in {10, 20, 30}; the other
four have fixed small dimensions.

Harder variants with the starting point scaled by 10 or 100 are available
through a name suffix, e.g. ``rosenbrock-x100``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import (
    DimensionNotSupportedError,
    NonFiniteResultError,
    UnknownProblemError,
)

SCALABLE_DIMS = (10, 20, 30)

# Admissible starting-point multipliers, selectable via the -x10 / -x100
# name suffix.
START_SCALES = {"": 1.0, "-x10": 10.0, "-x100": 100.0}


def brown_almost_linear(x):
    n = x.size
    f = np.empty(n)
    f[: n - 1] = x[: n - 1] + x.sum() - (n + 1.0)
    f[n - 1] = np.prod(x) - 1.0
    return f


def broyden_bounded(x):
    # banded system: each equation couples x_i to the five entries below
    # and one above
    n = x.size
    q = x * (1.0 + x)
    c = np.concatenate(([0.0], np.cumsum(q)))
    lo = np.maximum(np.arange(n) - 5, 0)
    hi = np.minimum(np.arange(n) + 1, n - 1)
    window = c[hi + 1] - c[lo]
    return x * (2.0 + 5.0 * x**2) + 1.0 - (window - q)


def broyden_tridiagonal(x):
    xp = np.concatenate(([0.0], x, [0.0]))
    return (3.0 - 2.0 * xp[1:-1]) * xp[1:-1] - xp[:-2] - 2.0 * xp[2:] + 1.0


def _mesh(n):
    return np.arange(1, n + 1) / (n + 1.0)


def discrete_boundary_value(x):
    n = x.size
    h = 1.0 / (n + 1.0)
    t = _mesh(n)
    xp = np.concatenate(([0.0], x, [0.0]))
    return 2.0 * xp[1:-1] - xp[:-2] - xp[2:] + 0.5 * h * h * (x + t + 1.0) ** 3


def discrete_integral(x):
    n = x.size
    h = 1.0 / (n + 1.0)
    t = _mesh(n)
    cube = (x + t + 1.0) ** 3
    lower = np.cumsum(t * cube)
    upper = np.concatenate((np.cumsum(((1.0 - t) * cube)[::-1])[::-1][1:], [0.0]))
    return x + 0.5 * h * ((1.0 - t) * lower + t * upper)


def trigonometric(x):
    n = x.size
    i = np.arange(1, n + 1)
    return n - np.cos(x).sum() + i * (1.0 - np.cos(x)) - np.sin(x)


def powell_singular(x):
    return np.array(
        [
            x[0] + 10.0 * x[1],
            np.sqrt(5.0) * (x[2] - x[3]),
            (x[1] - 2.0 * x[2]) ** 2,
            np.sqrt(10.0) * (x[0] - x[3]) ** 2,
        ]
    )


def helical_valley(x):
    if x[0] > 0.0:
        angle = np.arctan(x[1] / x[0]) / (2.0 * np.pi)
    elif x[0] < 0.0:
        angle = np.arctan(x[1] / x[0]) / (2.0 * np.pi) + 0.5
    else:
        angle = 0.25 * np.sign(x[1])
    return np.array(
        [
            10.0 * (x[2] - 10.0 * angle),
            10.0 * (np.hypot(x[0], x[1]) - 1.0),
            x[2],
        ]
    )


def powell_badly_scaled(x):
    return np.array(
        [1e4 * x[0] * x[1] - 1.0, np.exp(-x[0]) + np.exp(-x[1]) - 1.0001]
    )


def rosenbrock(x):
    return np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]])


# Root of powell_badly_scaled, found offline by high-precision Newton
# iteration and rounded to float64.
_PBS_ROOT = np.array([1.0981593296998174e-05, 9.106146739866524])


@dataclass
class ProblemSpec:
    """A concrete problem instance with a budget counter.

    `evaluate` increments `fevals` once per residual evaluation, so a
    solver's reported cost can be reconciled against the counter exactly.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    x0: np.ndarray
    known_root: np.ndarray | None = None
    fevals: int = field(default=0)

    @property
    def dimension(self) -> int:
        return self.x0.size

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"expected shape ({self.dimension},), got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise NonFiniteResultError(f"{self.name}: non-finite point")
        self.fevals += 1
        f = np.asarray(self.fn(x), dtype=float)
        if not np.all(np.isfinite(f)):
            raise NonFiniteResultError(
                f"{self.name}: residual has NaN/Inf entries"
            )
        return f


@dataclass(frozen=True)
class _Family:
    fn: Callable[[np.ndarray], np.ndarray]
    dims: tuple[int, ...]
    start: Callable[[int], np.ndarray]
    root: Callable[[int], np.ndarray] | None = None


_FAMILIES: dict[str, _Family] = {
    "brown-almost-linear": _Family(
        brown_almost_linear, SCALABLE_DIMS, lambda n: np.full(n, 0.5),
        lambda n: np.ones(n),
    ),
    "broyden-bounded": _Family(
        broyden_bounded, SCALABLE_DIMS, lambda n: np.full(n, -1.0)
    ),
    "broyden-tridiagonal": _Family(
        broyden_tridiagonal, SCALABLE_DIMS, lambda n: np.full(n, -1.0)
    ),
    "discrete-boundary-value": _Family(
        discrete_boundary_value, SCALABLE_DIMS, lambda n: _mesh(n) * (_mesh(n) - 1.0)
    ),
    "discrete-integral": _Family(
        discrete_integral, SCALABLE_DIMS, lambda n: _mesh(n) * (_mesh(n) - 1.0)
    ),
    "trigonometric": _Family(
        trigonometric, SCALABLE_DIMS, lambda n: np.full(n, 1.0 / n)
    ),
    "powell-singular": _Family(
        powell_singular, (4,), lambda n: np.array([3.0, -1.0, 0.0, 1.0]),
        lambda n: np.zeros(4),
    ),
    "helical-valley": _Family(
        helical_valley, (3,), lambda n: np.array([-1.0, 0.0, 0.0]),
        lambda n: np.array([1.0, 0.0, 0.0]),
    ),
    "powell-badly-scaled": _Family(
        powell_badly_scaled, (2,), lambda n: np.array([0.0, 1.0]),
        lambda n: _PBS_ROOT.copy(),
    ),
    "rosenbrock": _Family(
        rosenbrock, (2,), lambda n: np.array([-1.2, 1.0]),
        lambda n: np.ones(2),
    ),
}


def problem_names() -> list[str]:
    """Canonical family names, in registry order."""
    return list(_FAMILIES)


def admissible_dims(name: str) -> tuple[int, ...]:
    base, _ = _split_name(name)
    return _FAMILIES[base].dims


def _split_name(name: str) -> tuple[str, float]:
    for suffix, scale in START_SCALES.items():
        if suffix and name.endswith(suffix) and name[: -len(suffix)] in _FAMILIES:
            return name[: -len(suffix)], scale
    if name in _FAMILIES:
        return name, 1.0
    raise UnknownProblemError(f"unknown problem {name!r}")


def registry_lookup(name: str, n: int) -> ProblemSpec:
    """Build a fresh ProblemSpec for the named problem at dimension n.

    Raises UnknownProblemError for unrecognized names and
    DimensionNotSupportedError when n is outside the family's admissible
    set.  A fresh spec has its evaluation counter at zero.
    """
    base, scale = _split_name(name)
    family = _FAMILIES[base]
    if n not in family.dims:
        raise DimensionNotSupportedError(
            f"{base!r} supports n in {family.dims}, got {n}"
        )
    root = family.root(n) if family.root is not None else None
    return ProblemSpec(
        name=name,
        fn=family.fn,
        x0=scale * family.start(n),
        known_root=root,
    )
