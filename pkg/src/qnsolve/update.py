"""Rank-one Jacobian-approximation updates and the scaling safeguard.

The update has the form

    B_new = B + theta * outer(y - B @ s, c) / (c @ c)

where s is the accepted step, y the residual difference across it, and c
the update vector chosen by the method's direction memory.  theta = 1
enforces the secant condition B_new @ s = y exactly; theta is moved to an
interval endpoint only when the unit update would make B_new (near)
singular, which in practice essentially never happens.
"""
from __future__ import annotations

import numpy as np

from .exceptions import UpdateSkipped, ZeroVectorError
from .linalg import lu_factor, lu_solve

#: Determinant-ratio magnitudes below this count as singular.
EPS_SING = 1e-8

#: Default half-width of the admissible theta interval around 1.
DEFAULT_THETA_BAR = 0.5


class JacobianApprox:
    """A dense Jacobian approximation with a cached LU factorization.

    Construction factors the matrix immediately and raises
    SingularMatrixError if it has no acceptable pivots, so a held instance
    is always solvable.
    """

    def __init__(self, matrix: np.ndarray) -> None:
        self.matrix = np.array(matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("expected a square matrix")
        self._factors = lu_factor(self.matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self._factors, rhs)


def newton_direction(approx: JacobianApprox, residual: np.ndarray) -> np.ndarray:
    """Quasi-Newton search direction p with approx.matrix @ p = -residual."""
    return approx.solve(-np.asarray(residual, dtype=float))


def det_growth(approx: JacobianApprox, s: np.ndarray, y: np.ndarray, c: np.ndarray) -> float:
    """Per-unit-theta determinant growth rate gamma of the rank-one update.

    det(B_new) = det(B) * (1 + theta * gamma) by the matrix determinant
    lemma, so gamma fully determines how theta affects singularity.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    cc = float(c @ c)
    if cc == 0.0:
        raise ZeroVectorError("zero update vector")
    return float(c @ approx.solve(y - approx.matrix @ s)) / cc


def choose_theta(
    approx: JacobianApprox,
    s: np.ndarray,
    y: np.ndarray,
    c: np.ndarray,
    theta_bar: float = DEFAULT_THETA_BAR,
    eps_sing: float = EPS_SING,
    fixed: float | None = None,
) -> float:
    """Pick theta in [1 - theta_bar, 1 + theta_bar] keeping B_new nonsingular.

    Prefers theta = 1 (exact secant condition).  If that drives the
    determinant ratio |1 + gamma| under eps_sing, the interval endpoint
    with the larger ratio is used instead, ties resolved toward the
    smaller theta.  Raises UpdateSkipped when no admissible choice clears
    eps_sing; callers should then keep the current approximation.

    A `fixed` override bypasses the preference order but is still subject
    to the singularity check.
    """
    if not 0.0 < theta_bar < 1.0:
        raise ValueError("theta_bar must lie in (0, 1)")
    gamma = det_growth(approx, s, y, c)

    def ratio(theta: float) -> float:
        return abs(1.0 + theta * gamma)

    if fixed is not None:
        if ratio(fixed) >= eps_sing:
            return float(fixed)
        raise UpdateSkipped("fixed theta leaves the update singular")
    if ratio(1.0) >= eps_sing:
        return 1.0
    best = min((1.0 - theta_bar, 1.0 + theta_bar), key=lambda t: (-ratio(t), t))
    if ratio(best) >= eps_sing:
        return best
    raise UpdateSkipped("no admissible theta keeps the update nonsingular")


def rank_one_update(
    approx: JacobianApprox,
    s: np.ndarray,
    y: np.ndarray,
    c: np.ndarray,
    theta: float = 1.0,
) -> JacobianApprox:
    """Commit the rank-one update and return the new factored approximation.

    Raises ZeroVectorError for a zero update vector c, and
    SingularMatrixError if the updated matrix cannot be factored.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    cc = float(c @ c)
    if cc == 0.0:
        raise ZeroVectorError("zero update vector")
    correction = np.outer(y - approx.matrix @ s, c) / cc
    return JacobianApprox(approx.matrix + theta * correction)
