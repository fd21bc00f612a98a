"""Quality indicators and the rank-sum comparison used to score runs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from ._hvkernel import hv_sweep
from .pareto import nondominated_mask

HV_REF = 1.1
MC_SAMPLES = 100_000
EXACT_HV_MAX_M = 9
EXACT_RANKSUM_MAX_N = 20


@dataclass(frozen=True)
class IndicatorResult:
    value: float
    method: str  # "igd", "hv_exact" or "hv_mc"
    samples: int = 0
    normalized: bool = True
    excluded: int = 0  # points outside the HV reference box


def normalize(points, ideal, nadir) -> np.ndarray:
    """Map ``ideal`` to 0 and ``nadir`` to 1 per objective; no clipping."""
    ideal = np.asarray(ideal, dtype=float)
    nadir = np.asarray(nadir, dtype=float)
    span = nadir - ideal
    if np.any(span <= 0):
        raise ValueError("nadir must exceed ideal in every objective")
    return (np.asarray(points, dtype=float) - ideal) / span


def igd(solutions, reference) -> float:
    """Mean distance from each reference point to its nearest solution."""
    S = np.atleast_2d(np.asarray(solutions, dtype=float))
    R = np.atleast_2d(np.asarray(reference, dtype=float))
    if S.size == 0 or R.size == 0:
        raise ValueError("IGD needs nonempty solution and reference sets")
    dist, _ = cKDTree(S).query(R)
    return float(np.mean(dist))


# -- exact hypervolume -------------------------------------------------------


def _inside(points: np.ndarray, ref: np.ndarray) -> np.ndarray:
    return np.all(points < ref, axis=1)


def hv_exact(points, ref) -> float:
    """Exact hypervolume dominated by ``points`` and bounded by ``ref``.

    Points not strictly better than ``ref`` in every objective contribute
    nothing.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(ref, dtype=float)
    if P.size == 0:
        return 0.0
    if P.shape[1] != len(ref):
        raise ValueError("points and reference point differ in dimension")
    P = P[_inside(P, ref)]
    if len(P) == 0:
        return 0.0
    P = np.unique(P[nondominated_mask(P)], axis=0)
    return float(hv_sweep(np.ascontiguousarray(P), ref))


def hv_monte_carlo(points, ref, samples: int, rng: np.random.Generator) -> float:
    """Monte Carlo hypervolume over the box from the (0-clipped) point minimum to ``ref``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(ref, dtype=float)
    if P.size == 0:
        return 0.0
    P = P[_inside(P, ref)]
    if len(P) == 0:
        return 0.0
    P = P[nondominated_mask(P)]
    lo = np.maximum(P.min(axis=0), 0.0)
    if np.any(lo >= ref):
        return 0.0
    box = float(np.prod(ref - lo))
    chunk = max(1, 4_000_000 // (len(P) * len(ref)))
    hit = 0
    left = samples
    while left:
        m = min(chunk, left)
        Z = lo + (ref - lo) * rng.random((m, len(ref)))
        dom = np.zeros(m, dtype=bool)
        for p in P:
            dom |= np.all(p <= Z, axis=1)
        hit += int(dom.sum())
        left -= m
    return box * hit / samples


def hypervolume(
    points,
    ref=None,
    rng: np.random.Generator | None = None,
    samples: int = MC_SAMPLES,
    method: str = "auto",
    fraction: bool = True,
) -> IndicatorResult:
    """Hypervolume of normalised points, exact below 10 objectives.

    With ``fraction`` the volume is divided by the reference box volume
    ``prod(ref)``, giving a value in [0, 1] for normalised input.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    M = P.shape[1]
    ref = np.full(M, HV_REF) if ref is None else np.asarray(ref, dtype=float)
    excluded = int((~_inside(P, ref)).sum()) if P.size else 0
    if method == "auto":
        method = "hv_exact" if M <= EXACT_HV_MAX_M else "hv_mc"
    if method == "hv_exact":
        value, n = hv_exact(P, ref), 0
    elif method == "hv_mc":
        if rng is None:
            raise ValueError("Monte Carlo hypervolume needs an rng")
        value, n = hv_monte_carlo(P, ref, samples, rng), samples
    else:
        raise ValueError(f"unknown method {method!r}")
    if fraction:
        value /= float(np.prod(ref))
    return IndicatorResult(value, method, n, True, excluded)


# -- rank-sum test -----------------------------------------------------------


def _exact_two_sided_p(ranks2: np.ndarray, m: int, observed2: int) -> float:
    """Exact permutation p-value of a rank sum (ranks doubled to integers)."""
    total = int(ranks2.sum())
    # ways[j][s]: subsets of size j with doubled-rank sum s
    ways = np.zeros((m + 1, total + 1), dtype=object)
    ways[0][0] = 1
    for r in ranks2:
        r = int(r)
        for j in range(m, 0, -1):
            ways[j][r:] = ways[j][r:] + ways[j - 1][: total + 1 - r]
    dist = ways[m].astype(float)
    count = dist.sum()
    lower = dist[: observed2 + 1].sum() / count
    upper = dist[observed2:].sum() / count
    return min(1.0, 2.0 * min(lower, upper))


def rank_sum_p(a, b) -> float:
    """Two-sided Mann-Whitney-Wilcoxon p-value.

    Uses the exact permutation distribution (ties included) when the
    combined size is at most 20 and the tie-corrected normal approximation
    otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    both = np.r_[a, b]
    if np.all(both == both[0]):
        return 1.0
    if len(both) <= EXACT_RANKSUM_MAX_N:
        ranks2 = np.rint(2 * stats.rankdata(both)).astype(int)
        return _exact_two_sided_p(ranks2, len(a), int(ranks2[: len(a)].sum()))
    return float(
        stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic").pvalue
    )


def rank_sum_test(a, b, level: float = 0.05, higher_is_better: bool = True) -> str:
    """Compare sample ``a`` with ``b``: ``"better"``, ``"equal"`` or ``"worse"``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("rank-sum comparison needs at least 3 values per sample")
    if rank_sum_p(a, b) >= level:
        return "equal"
    diff = np.median(a) - np.median(b)
    if diff == 0:
        # medians tie; fall back to the mean rank direction
        r = stats.rankdata(np.r_[a, b])
        diff = r[: len(a)].mean() - r[len(a) :].mean()
    if diff == 0:
        return "equal"
    return "better" if (diff > 0) == higher_is_better else "worse"


SYMBOL = {"better": "+", "equal": "=", "worse": "-"}


def dispersion(values) -> float:
    """Half the interquartile range."""
    q1, q3 = np.percentile(np.asarray(values, dtype=float), [25, 75])
    return float(q3 - q1) / 2.0


def sci(x: float) -> str:
    """``2.1E-2`` style: one decimal, unpadded exponent."""
    if x == 0:
        return "0.0E+0"
    mant, exp = f"{x:.1E}".split("E")
    return f"{mant}E{int(exp):+d}".replace("E+-", "E-")


def format_cell(values) -> str:
    """``median(dispersion)`` as printed in result tables, e.g. ``0.533(1.2E-3)``."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0 or not np.all(np.isfinite(values)):
        return "nan"
    return f"{np.median(values):.3f}({sci(dispersion(values))})"


def binomial_sigma(volume_fraction: float, box: float, samples: int) -> float:
    """Standard deviation of a Monte Carlo hypervolume estimate."""
    p = min(max(volume_fraction, 0.0), 1.0)
    return box * math.sqrt(p * (1 - p) / samples)
