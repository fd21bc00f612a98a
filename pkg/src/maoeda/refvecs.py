"""Reference vectors: simplex lattices, hyperplane mapping and association."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_VECTORS = 10**6

# (H1, H2) per objective count, H2 = 0 for a single layer
DIVISIONS = {3: (14, 0), 5: (5, 0), 8: (3, 2), 10: (2, 2), 15: (2, 1)}


def das_dennis(M: int, H: int, max_count: int = MAX_VECTORS) -> np.ndarray:
    """All points of the simplex lattice with ``H`` divisions in ``M`` dimensions.

    Returns an array of shape ``(C(H+M-1, M-1), M)``.
    """
    if M < 2 or H < 1:
        raise ValueError(f"need M >= 2 and H >= 1, got M={M}, H={H}")
    count = math.comb(H + M - 1, M - 1)
    if count > max_count:
        raise ValueError(f"lattice would hold {count} vectors (max {max_count})")
    # stars and bars: bar positions among H + M - 1 slots
    bars = np.array(list(itertools.combinations(range(H + M - 1), M - 1)), dtype=int)
    bars = bars.reshape(count, M - 1)
    lo = np.hstack([np.full((count, 1), -1), bars])
    hi = np.hstack([bars, np.full((count, 1), H + M - 1)])
    return (hi - lo - 1) / H


def two_layer(M: int, H1: int, H2: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Boundary lattice plus an inside lattice shrunk halfway to the centroid.

    Returns ``(vectors, layer)`` where ``layer`` is 0 for boundary rows and 1
    for inside rows.
    """
    outer = das_dennis(M, H1)
    if H2 == 0:
        return outer, np.zeros(len(outer), dtype=int)
    if H2 < 0:
        raise ValueError("H2 must be >= 0")
    inner = 0.5 * das_dennis(M, H2) + 0.5 / M
    vecs = np.vstack([outer, inner])
    layer = np.r_[np.zeros(len(outer), dtype=int), np.ones(len(inner), dtype=int)]
    return vecs, layer


def reference_vectors(M: int, divisions: tuple[int, int] | None = None) -> np.ndarray:
    """The population-sized vector set used for ``M`` objectives."""
    if divisions is None:
        if M not in DIVISIONS:
            raise ValueError(f"no default divisions for M={M}; pass (H1, H2)")
        divisions = DIVISIONS[M]
    return two_layer(M, *divisions)[0]


def dump_vectors(path, vectors: np.ndarray, layer: np.ndarray) -> None:
    M = vectors.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"r{i + 1}" for i in range(M)] + ["layer"])
        for row, lay in zip(vectors, layer):
            w.writerow([repr(float(v)) for v in row] + ["inside" if lay else "boundary"])


def perpendicular_distance(s, v) -> float:
    """Distance from ``s`` to the line through the origin spanned by ``v``."""
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if vv == 0.0:
        raise ValueError("reference vector must be nonzero")
    return float(np.linalg.norm(s - (s @ v) / vv * v))


def perpendicular_distances(F: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Matrix of perpendicular distances, rows over points, columns over vectors."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    # a zero vector spans no line; every point then sits at distance |s|
    Vn = np.divide(V, norms, out=np.zeros_like(V), where=norms > 0)
    proj = F @ Vn.T
    d2 = np.sum(F * F, axis=1, keepdims=True) - proj * proj
    return np.sqrt(np.maximum(d2, 0.0))


@dataclass(frozen=True)
class ReferenceVectorSet:
    r0: np.ndarray
    v: np.ndarray
    ideal: np.ndarray
    extremes: np.ndarray
    intercepts: np.ndarray
    fallback: bool = False

    @classmethod
    def unmapped(cls, r0) -> "ReferenceVectorSet":
        """A set whose mapped vectors are the simplex vectors themselves."""
        r0 = np.atleast_2d(np.asarray(r0, dtype=float))
        M = r0.shape[1]
        return cls(r0, r0.copy(), np.zeros(M), np.eye(M), np.ones(M))

    def __len__(self) -> int:
        return len(self.v)


def associate(points, vectors: ReferenceVectorSet) -> np.ndarray:
    """Index of the nearest vector (perpendicular distance) for every point.

    ``argmin`` returns the first minimum, so ties go to the lowest index.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return np.zeros(0, dtype=int)
    return np.argmin(perpendicular_distances(points, vectors.v), axis=1)


def _intercepts(shifted: np.ndarray) -> np.ndarray | None:
    E = shifted.copy()
    M = len(E)
    for r in range(M):
        for q in range(r):
            if np.array_equal(E[r], E[q]):
                E[r, r] += 1e-6 * (r + 1)
                break
    try:
        b = np.linalg.solve(E, np.ones(M))
    except np.linalg.LinAlgError:
        return None
    with np.errstate(divide="ignore"):
        a = 1.0 / b
    if not np.all(np.isfinite(a)) or np.any(a <= 1e-12):
        return None
    return a


def map_vectors(r0, F) -> ReferenceVectorSet:
    """Stretch simplex vectors onto the hyperplane through the extreme points of ``F``.

    The ideal point is the componentwise minimum of ``F``; extremes are the
    per-objective maximisers. When the hyperplane is degenerate the
    intercepts fall back to the span ``max(F) - ideal``.
    """
    r0 = np.atleast_2d(np.asarray(r0, dtype=float))
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.size == 0:
        raise ValueError("map_vectors needs at least one objective vector")
    ideal = F.min(axis=0)
    extremes = F[np.argmax(F, axis=0)]
    a = _intercepts(extremes - ideal)
    fallback = a is None
    if fallback:
        a = F.max(axis=0) - ideal
        a = np.where(a > 1e-12, a, 1.0)
    v = r0 * a + ideal
    return ReferenceVectorSet(r0, v, ideal, extremes, a, fallback)
