"""Compiled dimension-sweep hypervolume kernel."""

import numpy as np
from numba import njit

# below this many points plain inclusion-exclusion beats the recursion
SMALL = 6


@njit(cache=True)
def _hv2(P, r0, r1):
    order = np.argsort(P[:, 0])
    vol = 0.0
    y = r1
    for i in order:
        if P[i, 1] < y:
            vol += (r0 - P[i, 0]) * (y - P[i, 1])
            y = P[i, 1]
    return vol


@njit(cache=True)
def _hv3(P, ref, xs, ys):
    """Sweep along the third objective over a 2-D staircase (x ascending, y descending).

    ``xs`` and ``ys`` are scratch buffers of length at least n + 1.
    """
    n = P.shape[0]
    order = np.argsort(P[:, 2])
    size = 0
    area = 0.0
    vol = 0.0
    for idx in range(n):
        p = order[idx]
        x0, y0 = P[p, 0], P[p, 1]
        j = np.searchsorted(xs[:size], x0)
        upper = ys[j - 1] if j > 0 else ref[1]
        covered = upper <= y0 or (j < size and xs[j] == x0 and ys[j] <= y0)
        if not covered:
            end = j
            while end < size and ys[end] >= y0:
                end += 1
            # area gained left of the first surviving staircase point
            nxt = xs[j] if j < size else ref[0]
            added = (nxt - x0) * (upper - y0)
            for q in range(j, end):
                nxt = xs[q + 1] if q + 1 < size else ref[0]
                added += (nxt - xs[q]) * (ys[q] - y0)
            area += added
            shift = 1 - (end - j)
            if shift > 0:
                for q in range(size - 1, end - 1, -1):
                    xs[q + shift] = xs[q]
                    ys[q + shift] = ys[q]
            elif shift < 0:
                for q in range(end, size):
                    xs[q + shift] = xs[q]
                    ys[q + shift] = ys[q]
            xs[j] = x0
            ys[j] = y0
            size += shift
        znext = P[order[idx + 1], 2] if idx + 1 < n else ref[2]
        vol += area * (znext - P[p, 2])
    return vol


@njit(cache=True)
def _small(P, ref):
    """Inclusion-exclusion over at most SMALL boxes."""
    n, d = P.shape
    vol = 0.0
    for mask in range(1, 1 << n):
        box = 1.0
        bits = 0
        for c in range(d):
            hi = -np.inf
            for i in range(n):
                if mask >> i & 1:
                    hi = max(hi, P[i, c])
            box *= ref[c] - hi
        for i in range(n):
            bits += mask >> i & 1
        vol += box if bits % 2 == 1 else -box
    return vol


@njit(cache=True)
def _sweep(P, n, d, ref, S, Q, keep, key, ko, yo, lvl):
    """Volume of rows [0, n) of ``P`` over columns [0, d).

    Each level slices on column d - 1 and subtracts what later rows already
    cover from every row's face. Scratch space is preallocated per level:
    ``S[lvl]`` holds the sorted rows, ``Q[lvl]`` the limited rows and
    ``Q[lvl + 1]`` the input handed down; ``keep`` and ``key`` are shared
    stacks addressed by the offsets ``ko`` and ``yo``.
    """
    if n <= SMALL:
        return _small(P[:n, :d], ref[:d])
    if d == 2:
        return _hv2(P[:n, :2], ref[0], ref[1])
    if d == 3:
        return _hv3(P[:n, :3], ref[:3], key[yo : yo + n + 1], key[yo + n + 1 : yo + 2 * n + 2])
    order = np.argsort(-P[:n, d - 1])
    Sl = S[lvl]
    for i in range(n):
        for c in range(d):
            Sl[i, c] = P[order[i], c]
    Ql = Q[lvl]
    down = Q[lvl + 1]
    vol = 0.0
    for i in range(n):
        face = 1.0
        for c in range(d - 1):
            face *= ref[c] - Sl[i, c]
        m = n - i - 1
        if m > 0:
            # clip later rows to row i's box; keep the non-dominated ones,
            # scanning by coordinate sum so a dominator is always seen first
            for j in range(m):
                tot = 0.0
                for c in range(d - 1):
                    v = max(Sl[i + 1 + j, c], Sl[i, c])
                    Ql[j, c] = v
                    tot += v
                key[yo + j] = tot
            nk = 0
            for a in np.argsort(key[yo : yo + m]):
                drop = False
                for t in range(nk):
                    b = keep[ko + t]
                    weak = True
                    for c in range(d - 1):
                        if Ql[b, c] > Ql[a, c]:
                            weak = False
                            break
                    if weak:
                        drop = True
                        break
                if not drop:
                    keep[ko + nk] = a
                    nk += 1
            for t in range(nk):
                for c in range(d - 1):
                    down[t, c] = Ql[keep[ko + t], c]
            face -= _sweep(down, nk, d - 1, ref, S, Q, keep, key, ko + nk, yo + m, lvl + 2)
        vol += (ref[d - 1] - Sl[i, d - 1]) * face
    return vol


def hv_sweep(P, ref):
    """Hypervolume of mutually non-dominated rows of ``P``, all strictly inside ``ref``."""
    # kept as a Python entry point: numba segfaults when loading a cached
    # recursive function that is called from another jitted function
    P = np.ascontiguousarray(P, dtype=float)
    ref = np.ascontiguousarray(ref, dtype=float)
    n, d = P.shape
    if n == 0:
        return 0.0
    S = np.empty((2 * d + 2, n, d))
    Q = np.empty((2 * d + 2, n, d))
    keep = np.empty(n * (d + 1), np.int64)
    key = np.empty(n * (d + 3))
    return _sweep(P, n, d, ref, S, Q, keep, key, 0, 0, 0)
