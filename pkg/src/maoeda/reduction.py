"""Decision-space dimension reduction.

Corner solutions found by Pareto corner search (PCSEA) serve as training
data for a PCA-based test that identifies decision variables which the
principal subspace does not reconstruct. Those variables are frozen at
their training mean; the remaining ones form the reduced search space,
expressed as offsets from the mean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .pareto import nondominated_mask
from .problems import ProblemSpec, evaluate

ZERO_COLUMN_RTOL = 1e-8
TIE_RTOL = 1e-10
# a column is also removed when its share of the reconstruction is below
# this fraction of the best-reconstructed column (see reduce_dimensions)
LEVERAGE_RTOL = 0.02


@dataclass(frozen=True)
class CornerArchive:
    X: np.ndarray
    F: np.ndarray
    generations_used: int
    evaluations_used: int

    def __len__(self):
        return len(self.X)


@dataclass(frozen=True)
class ReductionMap:
    """Removed columns (0-based, sorted) and the training column means."""

    removed: tuple[int, ...]
    mu: np.ndarray
    degenerate: bool = False

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def k(self) -> int:
        return self.n - len(self.removed)

    @property
    def retained(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.removed)] = False
        return np.flatnonzero(mask)

    @classmethod
    def identity(cls, n: int) -> "ReductionMap":
        return cls((), np.zeros(n))


def exclusive_l2(f, i: int) -> float:
    """Squared norm of ``f`` without component ``i`` (0-based)."""
    f = np.asarray(f, dtype=float)
    if not 0 <= i < len(f):
        raise IndexError(f"objective index {i} out of range for M={len(f)}")
    return float(f @ f - f[i] * f[i])


def _exclusive_l2_all(F: np.ndarray) -> np.ndarray:
    sq = F * F
    return sq.sum(axis=1, keepdims=True) - sq


def _quantize(key: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(key).max(initial=0.0)))
    return np.round(key / (TIE_RTOL * scale))


def corner_ranks(F: np.ndarray) -> np.ndarray:
    """Best rank of each row over the 2M ascending lists (objectives, exclusive L2).

    Keys equal up to ``TIE_RTOL`` are ordered by the complementary key of
    the same objective: exclusive L2 for an objective list and the
    objective for an exclusive-L2 list. Without this, solutions on an edge
    where the key is exactly zero tie regardless of their distance from
    the front.
    """
    excl = _exclusive_l2_all(F)
    M = F.shape[1]
    ranks = np.empty((len(F), 2 * M), dtype=int)
    for i in range(M):
        for j, (primary, secondary) in enumerate(
            [(F[:, i], excl[:, i]), (excl[:, i], F[:, i])]
        ):
            order = np.lexsort((secondary, _quantize(primary)))
            ranks[order, i + j * M] = np.arange(len(F))
    return ranks.min(axis=1)


def sbx(parents: np.ndarray, rng, eta: float = 20.0, prob: float = 1.0) -> np.ndarray:
    """Simulated binary crossover on consecutive parent pairs in ``[0, 1]``."""
    P, n = parents.shape
    p1, p2 = parents[0::2], parents[1::2]
    m = min(len(p1), len(p2))
    p1, p2 = p1[:m], p2[:m]
    u = rng.random((m, n))
    beta = np.where(
        u <= 0.5, (2 * u) ** (1 / (eta + 1)), (1 / (2 * (1 - u))) ** (1 / (eta + 1))
    )
    beta *= np.where(rng.random((m, n)) < 0.5, 1.0, -1.0)
    beta[rng.random((m, n)) > 0.5] = 1.0
    beta[rng.random(m) > prob] = 1.0
    c1 = 0.5 * ((p1 + p2) + beta * (p1 - p2))
    c2 = 0.5 * ((p1 + p2) - beta * (p1 - p2))
    children = np.vstack([c1, c2])
    if len(children) < P:
        children = np.vstack([children, parents[2 * m :]])
    return np.clip(children, 0.0, 1.0)


def polynomial_mutation(X: np.ndarray, rng, eta: float = 20.0, prob: float | None = None):
    """Polynomial mutation for variables in ``[0, 1]``; ``prob`` defaults to 1/n."""
    X = X.copy()
    P, n = X.shape
    prob = 1.0 / n if prob is None else prob
    site = rng.random((P, n)) < prob
    u = rng.random((P, n))
    lo = u < 0.5
    d1, d2 = X, 1.0 - X
    with np.errstate(invalid="ignore"):
        left = (2 * u + (1 - 2 * u) * (1 - d1) ** (eta + 1)) ** (1 / (eta + 1)) - 1
        right = 1 - (2 * (1 - u) + 2 * (u - 0.5) * (1 - d2) ** (eta + 1)) ** (1 / (eta + 1))
    delta = np.where(lo, left, right)
    X[site] += delta[site]
    return np.clip(X, 0.0, 1.0)


def _tournament(fitness: np.ndarray, count: int, rng) -> np.ndarray:
    a = rng.integers(len(fitness), size=count)
    b = rng.integers(len(fitness), size=count)
    return np.where(fitness[a] <= fitness[b], a, b)


def pcsea_search(
    spec: ProblemSpec, pop_size: int, generations: int, rng: np.random.Generator
) -> CornerArchive:
    """Pareto corner search.

    Each generation ranks parents plus offspring in the 2M ascending lists
    and keeps the ``pop_size`` solutions with the best (smallest) rank. The
    archive is the non-dominated subset of the final population.
    """
    if pop_size < 2 * spec.M:
        raise ValueError(f"pop_size must be >= 2M = {2 * spec.M}")
    if generations < 1:
        raise ValueError("generations must be >= 1")
    X = rng.random((pop_size, spec.n))
    F = evaluate(spec, X)
    evals = pop_size
    fitness = corner_ranks(F)
    for _ in range(generations):
        mating = X[_tournament(fitness, pop_size, rng)]
        Xo = polynomial_mutation(sbx(mating, rng), rng)
        Fo = evaluate(spec, Xo)
        evals += len(Xo)
        Xa, Fa = np.vstack([X, Xo]), np.vstack([F, Fo])
        rank = corner_ranks(Fa)
        keep = np.argsort(rank, kind="stable")[:pop_size]
        X, F, fitness = Xa[keep], Fa[keep], rank[keep]
        # ranks are relative to the merged pool; re-rank survivors for mating
        fitness = corner_ranks(F)
    nd = nondominated_mask(F)
    return CornerArchive(X[nd], F[nd], generations, evals)


def dump_archive(path, archive: CornerArchive) -> None:
    n, M = archive.X.shape[1], archive.F.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(n)] + [f"f{i + 1}" for i in range(M)])
        for x, f in zip(archive.X, archive.F):
            w.writerow([repr(float(v)) for v in np.r_[x, f]])


def principal_subspace(Xc: np.ndarray, threshold: float) -> np.ndarray:
    """Leading eigenvectors (columns) of the covariance of centred data ``Xc``.

    Keeps the fewest components whose eigenvalue ratio reaches ``threshold``.
    """
    cov = Xc.T @ Xc / max(len(Xc) - 1, 1)
    lam, vec = np.linalg.eigh(cov)
    lam, vec = lam[::-1].clip(min=0.0), vec[:, ::-1]
    total = lam.sum()
    if total <= 0.0:
        return vec[:, :0]
    ratio = np.cumsum(lam) / total
    r = int(np.searchsorted(ratio, threshold - 1e-12)) + 1
    return vec[:, : min(r, len(lam))]


def reduce_dimensions(X, alpha: float = 0.96) -> ReductionMap:
    """Find decision columns that the alpha-principal subspace leaves at zero.

    The centred data is projected onto the retained components and mapped
    back. A column of the reconstruction counts as zero when its mean
    absolute value is below ``ZERO_COLUMN_RTOL * (1 + |mu_j|)``, or below
    ``LEVERAGE_RTOL`` times the largest column's mean absolute value. The
    second test is what makes the zero test usable on data that is only
    approximately Pareto-optimal.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("need a matrix with at least two rows")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    mu = X.mean(axis=0)
    Xc = X - mu
    U = principal_subspace(Xc, alpha)
    n = X.shape[1]
    if U.shape[1] == 0:
        return ReductionMap(tuple(range(n)), mu, degenerate=True)
    Xhat = Xc @ U @ U.T
    col = np.abs(Xhat).mean(axis=0)
    zero = (col < ZERO_COLUMN_RTOL * (1.0 + np.abs(mu))) | (
        col < LEVERAGE_RTOL * col.max()
    )
    return ReductionMap(tuple(int(j) for j in np.flatnonzero(zero)), mu)


def translate_population(P0, rmap: ReductionMap, clip: bool = True) -> np.ndarray:
    """Reduced-space offsets to full decision vectors (mu plus offsets)."""
    P0 = np.asarray(P0, dtype=float)
    if P0.ndim == 1:
        if P0.size == 0:
            return np.empty((0, rmap.n))
        P0 = P0[None, :]
    if P0.shape[1] != rmap.k:
        raise ValueError(f"expected {rmap.k} reduced columns, got {P0.shape[1]}")
    out = np.tile(rmap.mu, (len(P0), 1))
    out[:, rmap.retained] += P0
    return np.clip(out, 0.0, 1.0) if clip else out
