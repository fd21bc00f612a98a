"""DTLZ1-DTLZ4 benchmark problems and their sign-flipped (minus) variants.

All problems are minimised over the unit box ``[0, 1]^n`` with
``n = M + k - 1`` decision variables, where ``k`` is 5 for DTLZ1 and 10
for DTLZ2-DTLZ4. The minus variants return ``-f`` for the corresponding
DTLZ objective vector ``f``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

DTLZ4_ALPHA = 100.0


class ProblemId(str, enum.Enum):
    DTLZ1 = "DTLZ1"
    DTLZ2 = "DTLZ2"
    DTLZ3 = "DTLZ3"
    DTLZ4 = "DTLZ4"
    DTLZ1m = "DTLZ1m"
    DTLZ2m = "DTLZ2m"
    DTLZ3m = "DTLZ3m"
    DTLZ4m = "DTLZ4m"

    @property
    def is_minus(self) -> bool:
        return self.value.endswith("m")

    @property
    def base(self) -> "ProblemId":
        return ProblemId(self.value.rstrip("m"))


@dataclass(frozen=True)
class ProblemSpec:
    """A DTLZ instance with ``M`` objectives."""

    id: ProblemId
    M: int

    def __post_init__(self):
        object.__setattr__(self, "id", ProblemId(self.id))
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")

    @classmethod
    def from_name(cls, name: str, M: int) -> "ProblemSpec":
        """Parse names such as ``dtlz2``, ``DTLZ3m`` or ``dtlz1-``."""
        key = name.strip().upper().replace("-", "M").replace("⁻", "M")
        key = key[:-1] + "m" if key.endswith("M") else key
        return cls(ProblemId(key), M)

    @property
    def k(self) -> int:
        return 5 if self.id.base is ProblemId.DTLZ1 else 10

    @property
    def n(self) -> int:
        return self.M + self.k - 1

    @property
    def name(self) -> str:
        return self.id.value


@dataclass
class Solution:
    """A decision vector (possibly reduced) with its objective vector."""

    x: np.ndarray
    f: np.ndarray | None = None

    @property
    def evaluated(self) -> bool:
        return self.f is not None


def _g_multimodal(xd: np.ndarray) -> np.ndarray:
    k = xd.shape[1]
    d = xd - 0.5
    return 100.0 * (k + np.sum(d * d - np.cos(20.0 * np.pi * d), axis=1))


def _g_sphere(xd: np.ndarray) -> np.ndarray:
    d = xd - 0.5
    return np.sum(d * d, axis=1)


def _linear_shape(xp: np.ndarray, M: int) -> np.ndarray:
    P = xp.shape[0]
    F = np.ones((P, M))
    for i in range(M):
        F[:, i] = np.prod(xp[:, : M - 1 - i], axis=1)
        if i > 0:
            F[:, i] *= 1.0 - xp[:, M - 1 - i]
    return 0.5 * F


def _sphere_shape(xp: np.ndarray, M: int) -> np.ndarray:
    P = xp.shape[0]
    c = np.cos(0.5 * np.pi * xp)
    s = np.sin(0.5 * np.pi * xp)
    F = np.ones((P, M))
    for i in range(M):
        F[:, i] = np.prod(c[:, : M - 1 - i], axis=1)
        if i > 0:
            F[:, i] *= s[:, M - 1 - i]
    return F


def evaluate(spec: ProblemSpec, x) -> np.ndarray:
    """Objective vector(s) of ``x``.

    ``x`` may be a single decision vector of length ``spec.n`` or a
    ``(P, n)`` matrix; the result has matching leading shape.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != spec.n:
        raise ValueError(
            f"{spec.name} with M={spec.M} expects {spec.n} decision variables, "
            f"got {X.shape[-1]}"
        )
    if np.isnan(X).any():
        raise ValueError("decision vector contains NaN")

    M = spec.M
    xp, xd = X[:, : M - 1], X[:, M - 1 :]
    base = spec.id.base
    if base is ProblemId.DTLZ1:
        F = (1.0 + _g_multimodal(xd))[:, None] * _linear_shape(xp, M)
    elif base is ProblemId.DTLZ2:
        F = (1.0 + _g_sphere(xd))[:, None] * _sphere_shape(xp, M)
    elif base is ProblemId.DTLZ3:
        F = (1.0 + _g_multimodal(xd))[:, None] * _sphere_shape(xp, M)
    else:
        F = (1.0 + _g_sphere(xd))[:, None] * _sphere_shape(xp**DTLZ4_ALPHA, M)
    if spec.id.is_minus:
        F = -F
    return F[0] if single else F


@lru_cache(maxsize=None)
def _max_multimodal_term() -> float:
    # max over d in [-0.5, 0.5] of d^2 - cos(20 pi d); the peak sits next to d = 0.45
    res = minimize_scalar(
        lambda d: -(d * d - math.cos(20.0 * math.pi * d)),
        bounds=(0.44, 0.46),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(-res.fun)


def max_g(spec: ProblemSpec) -> float:
    """Largest value of the distance function over the unit box."""
    if spec.id.base in (ProblemId.DTLZ1, ProblemId.DTLZ3):
        return 100.0 * spec.k * (1.0 + _max_multimodal_term())
    return 0.25 * spec.k


def _front_scale(spec: ProblemSpec) -> float:
    return 0.5 if spec.id.base is ProblemId.DTLZ1 else 1.0


def true_bounds(spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Ideal and nadir points of the Pareto front.

    For the minus variants the front is the ``g = max g`` layer scaled by
    ``-1``, so the bounds are the DTLZ objective-region bounds negated and
    swapped.
    """
    M = spec.M
    scale = _front_scale(spec)
    if not spec.id.is_minus:
        return np.zeros(M), np.full(M, scale)
    region_max = scale * (1.0 + max_g(spec))
    return np.full(M, -region_max), np.zeros(M)


def front_exponent(spec: ProblemSpec) -> int:
    return 1 if spec.id.base is ProblemId.DTLZ1 else 2


def sample_front(
    spec: ProblemSpec,
    count: int,
    rng: np.random.Generator,
    front_file: str | Path | None = None,
) -> np.ndarray:
    """Uniform sample of ``count`` points on the true Pareto front.

    DTLZ1 points are drawn uniformly on the simplex ``sum f = 0.5``; the
    spherical fronts use normalised absolute Gaussian directions. Minus
    variants have no analytic reference recipe, so a fixture file written by
    :func:`write_front` must be supplied for them.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if spec.id.is_minus:
        if front_file is None:
            raise ValueError(
                f"no analytic reference front for {spec.name}; pass front_file"
            )
        return read_front(front_file)
    M = spec.M
    if spec.id.base is ProblemId.DTLZ1:
        E = rng.exponential(size=(count, M))
        return 0.5 * E / E.sum(axis=1, keepdims=True)
    G = np.abs(rng.standard_normal((count, M)))
    norms = np.linalg.norm(G, axis=1, keepdims=True)
    # zero-norm draws have probability 0 but guard anyway
    G[norms[:, 0] == 0] = 1.0
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def write_front(path, points: np.ndarray, spec: ProblemSpec, seed: int) -> None:
    """Write a front fixture: ``# problem M count seed`` then one vector per line."""
    points = np.atleast_2d(points)
    with open(path, "w") as fh:
        fh.write(f"# {spec.name} {spec.M} {len(points)} {seed}\n")
        for row in points:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_front(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "#" or len(header) != 5:
            raise ValueError(f"{path}: malformed front header")
        M, count = int(header[2]), int(header[3])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (count, M):
        raise ValueError(f"{path}: expected {count}x{M} points, got {data.shape}")
    return data
