"""Small dense linear-algebra helpers used by the solver core.

Vectors and matrices are plain float64 numpy arrays.  Everything here is
sized for the systems this package targets (n of a few dozen), so clarity
wins over asymptotics: factorizations are recomputed rather than updated.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .exceptions import SingularMatrixError, ZeroVectorError

# Pivots below PIVOT_RTOL times the largest row norm count as singular.
PIVOT_RTOL = 1e-14

# Basis columns whose new-direction content falls below this fraction of
# their own length are dropped when building an orthonormal span basis.
_DROP_RTOL = 1e-13

# Norm floor below which a vector is treated as zero.  Kept near the
# underflow threshold on purpose: directions matter here, not magnitudes,
# and steps shrink by many orders near convergence.
_NORM_FLOOR = 1e-150


def lu_factor(a: np.ndarray):
    """Row-pivoted LU factorization with an explicit singularity check.

    Returns an opaque factorization object for `lu_solve`.  Raises
    SingularMatrixError when any pivot is smaller than PIVOT_RTOL times
    the largest Euclidean row norm of `a`.
    """
    a = np.asarray(a, dtype=float)
    row_scale = float(np.max(np.linalg.norm(a, axis=1)))
    if not np.isfinite(row_scale) or row_scale == 0.0:
        raise SingularMatrixError("matrix has no usable pivot scale")
    with warnings.catch_warnings():
        # scipy warns on exact zero pivots; the diagonal check below covers it
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_RTOL * row_scale:
        raise SingularMatrixError("pivot below threshold")
    return lu, piv


def lu_solve(factorization, b: np.ndarray) -> np.ndarray:
    return scipy.linalg.lu_solve(factorization, np.asarray(b, dtype=float), check_finite=False)


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the square system a @ x = b.

    Raises SingularMatrixError when a pivot of the row-pivoted elimination
    falls below PIVOT_RTOL times the largest row norm of `a`.
    """
    return lu_solve(lu_factor(a), b)


def qr_nonneg_diag(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR factorization with a nonnegative diagonal of R.

    Column i of Q and row i of R are negated together wherever the
    Householder factorization produced R[i, i] < 0, which leaves Q @ R
    unchanged and Q's columns orthonormal.
    """
    m = np.asarray(m, dtype=float)
    q, r = np.linalg.qr(m, mode="reduced")
    neg = np.diag(r) < 0.0
    if np.any(neg):
        q = q.copy()
        r = r.copy()
        q[:, neg] *= -1.0
        r[neg, :] *= -1.0
    return q, r


def orthonormal_span_basis(basis: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) for the span of the given vectors.

    Near-dependent input is handled by dropping columns whose R diagonal is
    tiny relative to their own length and refactoring; projection onto the
    span is invariant under per-column scaling, so columns are normalized
    first.  Returns an (n, r) array, possibly with r = 0.
    """
    cols = [np.asarray(v, dtype=float) for v in basis]
    if not cols:
        return np.empty((0, 0))
    n = cols[0].size
    kept = []
    for v in cols:
        nv = np.linalg.norm(v)
        if nv > _NORM_FLOOR:
            kept.append(v / nv)
    while kept:
        q, r = qr_nonneg_diag(np.column_stack(kept))
        ok = np.diag(r) > _DROP_RTOL
        if np.all(ok):
            return q
        kept = [c for c, keep in zip(kept, ok) if keep]
    return np.empty((n, 0))


def project_onto_span(basis: list[np.ndarray] | np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of `v` onto span(basis).

    An empty basis gives the zero vector.
    """
    v = np.asarray(v, dtype=float)
    q = orthonormal_span_basis(basis)
    if q.shape[1] == 0:
        return np.zeros_like(v)
    return q @ (q.T @ v)


def gram_determinant(vectors: list[np.ndarray] | np.ndarray) -> float:
    """Determinant of the Gram matrix of the *normalized* input vectors.

    Computed as the squared product of the R diagonal from a QR
    factorization of the normalized columns.  Lies in [0, 1]; equals 1 for
    orthogonal directions and 0 for a linearly dependent set.  Invariant
    under permutation and per-vector scaling.

    Raises ZeroVectorError if any input vector has (numerically) zero norm.
    """
    cols = [np.asarray(v, dtype=float) for v in vectors]
    if not cols:
        return 1.0
    norms = [np.linalg.norm(c) for c in cols]
    if any(not np.isfinite(nv) or nv < _NORM_FLOOR for nv in norms):
        raise ZeroVectorError("cannot normalize a zero vector")
    n = cols[0].size
    if len(cols) > n:
        return 0.0
    unit = np.column_stack([c / nv for c, nv in zip(cols, norms)])
    _, r = qr_nonneg_diag(unit)
    return float(np.prod(np.diag(r) ** 2))
