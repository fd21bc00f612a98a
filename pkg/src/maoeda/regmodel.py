"""Regularity sub-models: a principal-subspace box plus isotropic Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# eigenvalues below this fraction of the largest are treated as exact zeros
EIG_RTOL = 1e-12


@dataclass(frozen=True)
class RegularityModel:
    mean: np.ndarray
    components: np.ndarray  # (i, k), orthonormal rows
    lo: np.ndarray
    hi: np.ndarray
    gamma: float
    eps: float
    eigenvalues: np.ndarray
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return len(self.components)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Projection interval per direction, enlarged by ``gamma`` on both ends."""
        span = self.hi - self.lo
        return self.lo - self.gamma * span, self.hi + self.gamma * span


def build_submodel(
    neighbors, beta: float = 0.96, gamma: float = 0.5, noise: str = "excluded"
) -> RegularityModel:
    """Fit the sub-model of one reference vector from its neighbour solutions.

    Args:
        neighbors: (T, k) decision vectors, duplicates allowed.
        beta: fraction of the eigenvalue sum the principal directions must reach.
        gamma: enlargement of the projection interval on each side.
        noise: ``"excluded"`` averages the non-principal eigenvalues over
            ``k - i + 1``; ``"literal"`` also includes the i-th eigenvalue in
            the sum.

    Returns:
        The fitted model. When all neighbours coincide the model is flagged
        degenerate and has no principal directions and zero noise.
    """
    X = np.asarray(neighbors, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("a sub-model needs at least two neighbours")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if noise not in ("excluded", "literal"):
        raise ValueError(f"unknown noise convention {noise!r}")
    k = X.shape[1]
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (len(X) - 1)
    lam, vec = np.linalg.eigh(cov)
    lam, vec = lam[::-1], vec[:, ::-1]
    lam = np.where(lam > EIG_RTOL * max(lam[0], 0.0), lam, 0.0)
    total = lam.sum()
    if total <= 0.0:
        empty = np.zeros(0)
        return RegularityModel(mean, np.zeros((0, k)), empty, empty, gamma, 0.0, lam, True)

    ratio = np.cumsum(lam) / total
    i = int(np.searchsorted(ratio, beta - 1e-12)) + 1
    i = min(i, k)
    V = vec[:, :i].T
    y = Xc @ V.T
    start = i if noise == "excluded" else i - 1
    eps = float(lam[start:].sum() / (k - i + 1))
    return RegularityModel(mean, V, y.min(axis=0), y.max(axis=0), gamma, eps, lam)


def sample_model(model: RegularityModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` points: uniform in the enlarged box plus N(0, eps) noise."""
    if count < 1:
        raise ValueError("count must be >= 1")
    k = len(model.mean)
    out = np.tile(model.mean, (count, 1))
    if model.dim:
        lo, hi = model.bounds()
        tau = lo + (hi - lo) * rng.random((count, model.dim))
        out += tau @ model.components
    if model.eps > 0.0:
        out += rng.normal(0.0, np.sqrt(model.eps), size=(count, k))
    return out
