"""Pareto dominance for minimisation."""

from __future__ import annotations

import numpy as np
from numba import njit


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


@njit(cache=True)
def _scan_sorted(Fs):
    n, d = Fs.shape
    keep = np.zeros(n, np.bool_)
    archive = np.empty(n, np.int64)
    size = 0
    for a in range(n):
        beaten = False
        for t in range(size):
            b = archive[t]
            le = True
            lt = False
            for c in range(d):
                if Fs[b, c] > Fs[a, c]:
                    le = False
                    break
                if Fs[b, c] < Fs[a, c]:
                    lt = True
            if le and lt:
                beaten = True
                break
        if not beaten:
            keep[a] = True
            archive[size] = a
            size += 1
    return keep


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of the first non-dominated front of ``F``.

    Rows are scanned by increasing coordinate sum (ties broken
    lexicographically), so every dominator of a row comes before it. By
    transitivity a row only needs testing against the non-dominated rows
    already found.
    """
    F = np.asarray(F, dtype=float)
    n = len(F)
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort(tuple(F[:, ::-1].T) + (F.sum(axis=1),))
    keep = _scan_sorted(np.ascontiguousarray(F[order]))
    mask = np.zeros(n, dtype=bool)
    mask[order[keep]] = True
    return mask


@njit(cache=True)
def _dominated_by(A, B):
    """Rows of ``A`` dominated by some row of ``B``.

    ``B`` is scanned by increasing coordinate sum and the scan stops once
    the sum exceeds that of the row being tested.
    """
    out = np.zeros(A.shape[0], np.bool_)
    d = A.shape[1]
    sb = B.sum(axis=1)
    order = np.argsort(sb)
    for a in range(A.shape[0]):
        sa = A[a].sum()
        for t in range(B.shape[0]):
            b = order[t]
            if sb[b] > sa:
                break
            le = True
            lt = False
            for c in range(d):
                if B[b, c] > A[a, c]:
                    le = False
                    break
                if B[b, c] < A[a, c]:
                    lt = True
            if le and lt:
                out[a] = True
                break
    return out


def extend_front(FA: np.ndarray, FB: np.ndarray, front_a: np.ndarray):
    """Non-dominated masks of ``FA`` and ``FB`` within their union.

    ``front_a`` must be the non-dominated mask of ``FA`` alone. Only the two
    fronts are compared with each other, which is much cheaper than sorting
    the union from scratch.
    """
    FA = np.asarray(FA, dtype=float)
    FB = np.asarray(FB, dtype=float)
    ia = np.flatnonzero(front_a)
    ib = np.flatnonzero(nondominated_mask(FB))
    A = np.ascontiguousarray(FA[ia])
    B = np.ascontiguousarray(FB[ib])
    mask_a = np.zeros(len(FA), dtype=bool)
    mask_b = np.zeros(len(FB), dtype=bool)
    if len(B) == 0 or len(A) == 0:
        mask_a[ia] = True
        mask_b[ib] = True
        return mask_a, mask_b
    mask_a[ia[~_dominated_by(A, B)]] = True
    mask_b[ib[~_dominated_by(B, A)]] = True
    return mask_a, mask_b


def nondominated_sort(F: np.ndarray) -> list[np.ndarray]:
    """Partition row indices of ``F`` into successive non-dominated fronts.

    Equal objective vectors do not dominate each other and share a front.
    """
    F = np.asarray(F, dtype=float)
    remaining = np.arange(len(F))
    fronts = []
    while len(remaining):
        mask = nondominated_mask(F[remaining])
        fronts.append(remaining[mask])
        remaining = remaining[~mask]
    return fronts
