"""Direction memories for the quasi-Newton family.

Each solver method is distinguished by how it picks the vector c that
shapes the rank-one Jacobian update, and by what history it keeps:

- qn1: no history, c is the latest step (classical Broyden).
- qn2: keep past steps while the new step stays safely outside their span,
  otherwise restart the memory (Gay-Schnabel with restarts).
- qn3: keep past steps, pruning individual near-dependent ones via the
  R-diagonal of a QR factorization of the normalized step matrix.
- qn4: keep past iterates and interpolate through a subset of them in
  sigma-stable general position.

Every recipe returns a c with c @ s == ||c||**2 (c is the component of the
step s orthogonal to the retained history), which is what preserves the
stored secant or interpolation conditions under the rank-one update.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DuplicatePointsError, ZeroStepError
from .linalg import gram_determinant, project_onto_span, qr_nonneg_diag

#: Default admissibility threshold for keeping history (fraction of the
#: step length that must survive projection, and the floor on normalized
#: Gram determinants).
DEFAULT_SIGMA = 0.1


def zero_step_floor(x: np.ndarray) -> float:
    """Step norms below this are treated as zero near the point x."""
    return 1e-14 * (1.0 + float(np.linalg.norm(x)))


def _check_step(s: np.ndarray, floor: float) -> float:
    norm = float(np.linalg.norm(s))
    if not np.isfinite(norm) or norm < floor:
        raise ZeroStepError(f"step norm {norm:.3e} below floor {floor:.3e}")
    return norm


def minimum_spanning_tree(points: list[np.ndarray]) -> list[tuple[int, int]]:
    """Prim's algorithm on the complete Euclidean graph over the points.

    Returns tree edges as (parent, child) pairs ordered by child index.
    Equal-cost ties are broken toward smaller node indices, so the result
    is deterministic for a given point order.
    """
    m = len(points)
    if m < 2:
        return []
    dist = np.linalg.norm(
        np.asarray(points)[:, None, :] - np.asarray(points)[None, :, :], axis=2
    )
    in_tree = [True] + [False] * (m - 1)
    best = dist[0].copy()
    parent = np.zeros(m, dtype=int)
    edges = []
    for _ in range(m - 1):
        j = min(
            (i for i in range(m) if not in_tree[i]),
            key=lambda i: (best[i], i),
        )
        in_tree[j] = True
        edges.append((int(parent[j]), j))
        improved = ~np.asarray(in_tree) & (dist[j] < best)
        best[improved] = dist[j][improved]
        parent[improved] = j
    return sorted(edges, key=lambda e: e[1])


def stable_general_position(
    points: list[np.ndarray], sigma: float = DEFAULT_SIGMA
) -> tuple[bool, list[np.ndarray]]:
    """Check whether points are in sigma-stable general position.

    Builds the minimum spanning tree of the points, takes its edge vectors,
    and requires the Gram determinant of the normalized edges to be at
    least sigma**2.  Returns (ok, edge_vectors).

    Raises DuplicatePointsError when two points coincide up to the zero
    floor.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    if len(pts) < 2:
        return True, []
    floor = 1e-14 * (1.0 + max(float(np.linalg.norm(p)) for p in pts))
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if np.linalg.norm(pts[a] - pts[b]) < floor:
                raise DuplicatePointsError(f"points {a} and {b} coincide")
    deltas = [pts[b] - pts[a] for a, b in minimum_spanning_tree(pts)]
    return gram_determinant(deltas) >= sigma**2, deltas


@dataclass
class StoredPair:
    index: int
    s: np.ndarray
    y: np.ndarray


class BroydenMemory:
    """Trivial memory for qn1: the update vector is the step itself."""

    def __init__(self) -> None:
        self.last_det_bound = 1.0

    @property
    def size(self) -> int:
        return 1

    def reset(self) -> None:
        pass

    def update(self, k: int, s: np.ndarray, y: np.ndarray, floor: float = 1e-14) -> np.ndarray:
        _check_step(s, floor)
        return np.asarray(s, dtype=float).copy()


class SecantMemory:
    """Step/residual-difference history for qn2 (restart) and qn3 (pruning).

    Stored pairs carry the iteration index they came from; indices older
    than the depth window (and older than dimension allows) are evicted
    before each update.  `last_det_bound` is the running lower bound on the
    normalized Gram determinant of the retained step set maintained by the
    pruning bookkeeping; it never exceeds the true determinant.
    """

    def __init__(
        self,
        n: int,
        sigma: float = DEFAULT_SIGMA,
        depth: int | None = None,
        variant: str = "restart",
    ) -> None:
        if variant not in ("restart", "pruning"):
            raise ValueError(f"unknown variant {variant!r}")
        if not 0.0 < sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        self.n = n
        self.sigma = sigma
        self.depth = n if depth is None else depth
        if not 0 <= self.depth <= n:
            raise ValueError("depth must lie in [0, n]")
        self.variant = variant
        self.pairs: list[StoredPair] = []
        self.last_det_bound = 1.0

    @property
    def size(self) -> int:
        return len(self.pairs)

    def retained_indices(self) -> list[int]:
        return [p.index for p in self.pairs]

    def reset(self) -> None:
        self.pairs = []
        self.last_det_bound = 1.0

    def _evict(self, k: int) -> None:
        oldest = max(k - self.depth, k - self.n + 1)
        self.pairs = [p for p in self.pairs if p.index >= oldest]

    def update(self, k: int, s: np.ndarray, y: np.ndarray, floor: float = 1e-14) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        _check_step(s, floor)
        self._evict(k)
        if self.variant == "restart":
            c = self._restart_vector(s)
        else:
            c = self._pruning_vector(s)
        self.pairs.append(StoredPair(k, s.copy(), y.copy()))
        return c

    def _restart_vector(self, s: np.ndarray) -> np.ndarray:
        c = s - project_onto_span([p.s for p in self.pairs], s)
        if np.linalg.norm(c) > self.sigma * np.linalg.norm(s):
            return c
        # new step too close to the span of the stored ones: restart
        self.pairs = []
        return s.copy()

    def _pruning_vector(self, s: np.ndarray) -> np.ndarray:
        # Normalized steps, newest first, so the new step anchors the QR.
        stored = sorted(self.pairs, key=lambda p: p.index, reverse=True)
        cols = [s / np.linalg.norm(s)] + [p.s / np.linalg.norm(p.s) for p in stored]
        _, r = qr_nonneg_diag(np.column_stack(cols))
        diag = {p.index: float(r[j + 1, j + 1]) for j, p in enumerate(stored)}

        retained = [p.index for p in stored]
        d = float(np.prod([diag[i] ** 2 for i in retained]))
        target = self.sigma**2
        while retained and d < target:
            # drop the most redundant stored step; ties fall to the oldest
            j = min(retained, key=lambda i: (diag[i], i))
            retained.remove(j)
            if diag[j] != 0.0:
                d /= diag[j] ** 2
            else:
                d = float(np.prod([diag[i] ** 2 for i in retained]))
        self.last_det_bound = d if retained else 1.0

        keep = set(retained)
        self.pairs = [p for p in self.pairs if p.index in keep]
        return s - project_onto_span([p.s for p in self.pairs], s)


@dataclass
class StoredPoint:
    index: int
    x: np.ndarray
    f: np.ndarray


class InterpolationMemory:
    """Iterate history for qn4.

    Keeps recent iterates in sigma-stable general position; the update
    vector is the component of the new iterate orthogonal to the affine
    manifold through the retained older iterates.  The previous and the
    new iterate are always retained.
    """

    def __init__(self, n: int, sigma: float = DEFAULT_SIGMA, depth: int | None = None) -> None:
        if not 0.0 < sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        self.n = n
        self.sigma = sigma
        self.depth = n if depth is None else depth
        if not 1 <= self.depth <= n:
            raise ValueError("depth must lie in [1, n]")
        self.points: list[StoredPoint] = []

    @property
    def size(self) -> int:
        return len(self.points)

    def retained_indices(self) -> list[int]:
        return [p.index for p in self.points]

    def start(self, index: int, x: np.ndarray, f: np.ndarray) -> None:
        self.points = [StoredPoint(index, np.asarray(x, float).copy(), np.asarray(f, float).copy())]

    def update(self, k: int, x_new: np.ndarray, f_new: np.ndarray) -> np.ndarray:
        x_new = np.asarray(x_new, dtype=float)
        f_new = np.asarray(f_new, dtype=float)
        prev = {p.index: p for p in self.points}
        if k not in prev:
            raise ValueError(f"memory does not contain the previous iterate {k}")
        s = x_new - prev[k].x
        _check_step(s, zero_step_floor(x_new))

        oldest = (k + 1) - min(self.depth, self.n)
        candidates = [p for p in self.points if p.index >= oldest]
        candidates.append(StoredPoint(k + 1, x_new.copy(), f_new.copy()))

        # Greedily drop oldest points until the rest sit in sigma-stable
        # general position.  The pair {k, k+1} qualifies whenever the step
        # is meaningfully nonzero.
        while True:
            try:
                ok, _ = stable_general_position([p.x for p in candidates], self.sigma)
            except DuplicatePointsError:
                ok = False
            if ok:
                break
            droppable = [p for p in candidates if p.index not in (k, k + 1)]
            if not droppable:
                raise ZeroStepError("consecutive iterates coincide")
            candidates.remove(min(droppable, key=lambda p: p.index))

        self.points = candidates
        anchor = prev[k].x
        basis = [p.x - anchor for p in self.points if p.index not in (k, k + 1)]
        return s - project_onto_span(basis, s)
