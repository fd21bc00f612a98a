"""The main loop: diversity repair, model-based offspring and reference-vector selection.

Populations are kept as parallel arrays: reduced-space offsets ``Z``
(relative to the reduction mean), full decision vectors ``X`` and
objectives ``F``. Selection routines return row indices.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .pareto import extend_front, nondominated_mask, nondominated_sort
from .problems import ProblemSpec, evaluate
from .reduction import (
    CornerArchive,
    ReductionMap,
    pcsea_search,
    reduce_dimensions,
    translate_population,
)
from .refvecs import (
    ReferenceVectorSet,
    associate,
    map_vectors,
    perpendicular_distances,
    reference_vectors,
)
from .regmodel import build_submodel, sample_model

__all__ = [
    "RunConfig",
    "Population",
    "GenerationRecord",
    "RunResult",
    "rng_stream",
    "run",
    "repair_diversity",
    "generate_offspring",
    "environmental_selection",
    "final_selection",
    "nondominated_sort",
]

log = logging.getLogger(__name__)

STREAMS = {"init": 0, "pcsea": 1, "repair": 2, "offspring": 3, "mc-hv": 4}


def rng_stream(seed: int, name: str, generation: int = 0) -> np.random.Generator:
    """Independent generator for one phase (and generation) of a seeded run."""
    return np.random.default_rng([seed, STREAMS[name], generation])


@dataclass
class RunConfig:
    """Settings of one run.

    ``eval_budget`` caps the evaluations of the main loop (initial population
    included); the corner search is counted separately in the ledger.
    ``t_max=None`` leaves the budget as the only stopping rule.
    """

    spec: ProblemSpec
    T: int = 25
    alpha: float = 0.96
    beta: float = 0.96
    gamma: float = 0.5
    t_max: int | None = None
    eval_budget: int = 57_000
    seed: int = 0
    no_diversity_repair: bool = False
    no_dimension_reduction: bool = False
    divisions: tuple[int, int] | None = None
    pcsea_pop: int = 100
    pcsea_gens: int = 50
    noise: str = "excluded"

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if self.t_max is not None and self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if not 0 < self.alpha <= 1 or not 0 < self.beta <= 1:
            raise ValueError("alpha and beta must lie in (0, 1]")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    def vectors(self) -> np.ndarray:
        return reference_vectors(self.spec.M, self.divisions)

    @property
    def N(self) -> int:
        return len(self.vectors())

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            out[f.name] = val.name if isinstance(val, ProblemSpec) else val
        return out


@dataclass
class Population:
    Z: np.ndarray  # reduced-space offsets
    X: np.ndarray  # full decision vectors
    F: np.ndarray
    generation: int = 0
    evaluations: int = 0
    front: np.ndarray | None = None  # non-dominated mask of F when known (set by run)

    def __len__(self) -> int:
        return len(self.F)

    def take(self, idx) -> "Population":
        return Population(self.Z[idx], self.X[idx], self.F[idx], self.generation, self.evaluations)

    @staticmethod
    def concat(*pops: "Population") -> "Population":
        pops = [p for p in pops if len(p)]
        return Population(
            np.vstack([p.Z for p in pops]),
            np.vstack([p.X for p in pops]),
            np.vstack([p.F for p in pops]),
            max(p.generation for p in pops),
            max(p.evaluations for p in pops),
        )


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    evaluations: int
    repaired: int  # |R_t|
    offspring: int  # |Q_t|
    unassigned: int  # vectors without a non-dominated solution before repair
    skipped: int  # vectors repair could not model
    front_size: int  # non-dominated members of P_{t+1}


@dataclass
class RunResult:
    config: RunConfig
    final: Population
    population: Population
    vectors: ReferenceVectorSet
    reduction: ReductionMap
    archive: CornerArchive | None
    trace: list[GenerationRecord] = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    stopped_by: str = "t_max"

    def write_trace(self, path) -> None:
        names = [f.name for f in fields(GenerationRecord)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for rec in self.trace:
                w.writerow([getattr(rec, n) for n in names])


# -- sampling helpers --------------------------------------------------------


class _Evaluator:
    """Translates reduced samples, evaluates them and keeps the budget ledger."""

    def __init__(self, spec: ProblemSpec, rmap: ReductionMap, budget: int):
        self.spec, self.rmap, self.budget = spec, rmap, budget
        self.used = 0

    @property
    def left(self) -> int:
        return self.budget - self.used

    def __call__(self, Z: np.ndarray, generation: int) -> Population:
        Z = Z[: max(self.left, 0)]
        X = translate_population(Z, self.rmap, clip=True)
        F = evaluate(self.spec, X) if len(X) else np.empty((0, self.spec.M))
        self.used += len(X)
        # store offsets of the clipped vector so models see what was evaluated
        Zc = X[:, self.rmap.retained] - self.rmap.mu[self.rmap.retained]
        return Population(Zc, X, F, generation, self.used)


def _nearest(dist_col: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` smallest entries; ties broken by index."""
    if count >= len(dist_col):
        return np.argsort(dist_col, kind="stable")
    part = np.argpartition(dist_col, count - 1)[:count]
    cut = dist_col[part].max()
    cand = np.flatnonzero(dist_col <= cut)
    return cand[np.argsort(dist_col[cand], kind="stable")][:count]


def _sample_neighbourhood(Zn: np.ndarray, count: int, beta, gamma, noise, rng) -> np.ndarray:
    if len(Zn) < 2 or Zn.shape[1] == 0:
        return np.repeat(Zn[:1], count, axis=0)
    model = build_submodel(Zn, beta, gamma, noise)
    return sample_model(model, count, rng)


# -- algorithm steps ---------------------------------------------------------


def repair_diversity(
    pop: Population,
    vectors: ReferenceVectorSet,
    T: int,
    beta: float,
    gamma: float,
    rng: np.random.Generator,
    noise: str = "excluded",
    nd_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Reduced-space samples for vectors that no non-dominated solution maps to.

    Each such vector models its ``T`` nearest population members plus the
    nearest non-dominated one (a duplicate is kept) and draws ``T`` samples.

    Returns:
        ``(Z, info)`` with the stacked samples in vector order and counts of
        unassigned and skipped vectors.
    """
    nd = np.flatnonzero(nondominated_mask(pop.F) if nd_mask is None else nd_mask)
    assigned = np.zeros(len(vectors), dtype=bool)
    assigned[associate(pop.F[nd], vectors)] = True
    todo = np.flatnonzero(~assigned)
    k = pop.Z.shape[1]
    if len(todo) == 0:
        return np.empty((0, k)), {"unassigned": 0, "skipped": 0}
    D = perpendicular_distances(pop.F, vectors.v[todo])
    D_nd = D[nd]
    out, skipped = [], 0
    for col in range(len(todo)):
        near = _nearest(D[:, col], T)
        best = nd[int(np.argmin(D_nd[:, col]))]
        idx = np.r_[near, best]
        if len(idx) < 2:
            skipped += 1
            continue
        out.append(_sample_neighbourhood(pop.Z[idx], T, beta, gamma, noise, rng))
    Z = np.vstack(out) if out else np.empty((0, k))
    return Z, {"unassigned": int(len(todo)), "skipped": skipped}


def generate_offspring(
    S: Population,
    vectors: ReferenceVectorSet,
    T: int,
    beta: float,
    gamma: float,
    rng: np.random.Generator,
    noise: str = "excluded",
) -> np.ndarray:
    """``T`` reduced-space samples per vector from its neighbours in ``S``.

    Neighbours are the ``T`` members of ``S`` nearest to the vector plus the
    single nearest one again. With fewer than two members in ``S`` every
    sample equals the first member.
    """
    if len(S) == 0:
        raise ValueError("offspring generation needs a nonempty set")
    N = len(vectors)
    if len(S) < 2:
        return np.repeat(S.Z[:1], T * N, axis=0)
    D = perpendicular_distances(S.F, vectors.v)
    out = []
    for i in range(N):
        near = _nearest(D[:, i], T)
        idx = np.r_[near, near[0]]
        out.append(_sample_neighbourhood(S.Z[idx], T, beta, gamma, noise, rng))
    return np.vstack(out)


def environmental_selection(
    F, vectors: ReferenceVectorSet, T: int, nd_mask: np.ndarray | None = None
) -> np.ndarray:
    """Indices of ``T * N`` distinct rows of ``F``, ``T`` per reference vector.

    Non-dominated rows are grouped by their nearest vector. Oversized groups
    are cut by perpendicular distance: their members are mutually
    non-dominated, so non-dominated sorting would return them as a single
    front. Short groups then take the nearest rows still unselected, in
    vector order. ``nd_mask`` may pass a precomputed non-dominated mask.
    """
    F = np.asarray(F, dtype=float)
    N = len(vectors)
    if T < 1:
        raise ValueError("T must be >= 1")
    if len(F) < T * N:
        raise ValueError(f"need at least {T * N} candidates, got {len(F)}")
    D = perpendicular_distances(F, vectors.v)
    nd = np.flatnonzero(nondominated_mask(F) if nd_mask is None else nd_mask)
    owner = np.argmin(D[nd], axis=1) if len(nd) else np.zeros(0, dtype=int)
    groups: list[np.ndarray] = []
    taken = np.zeros(len(F), dtype=bool)
    for i in range(N):
        L = nd[owner == i]
        if len(L) > T:
            L = L[_nearest(D[L, i], T)]
        groups.append(L)
        taken[L] = True
    for i in range(N):
        need = T - len(groups[i])
        if need <= 0:
            continue
        pool = np.flatnonzero(~taken)
        pick = pool[_nearest(D[pool, i], need)]
        taken[pick] = True
        groups[i] = np.r_[groups[i], pick]
    return np.concatenate(groups).astype(int)


def final_selection(F, vectors: ReferenceVectorSet, nd_mask: np.ndarray | None = None) -> np.ndarray:
    """Environmental selection with one solution per vector."""
    return environmental_selection(F, vectors, 1, nd_mask)


def prepare(config: RunConfig) -> tuple[ReductionMap, CornerArchive, ReferenceVectorSet]:
    """Corner search, dimension reduction and the initial vector mapping."""
    spec = config.spec
    archive = pcsea_search(
        spec, config.pcsea_pop, config.pcsea_gens, rng_stream(config.seed, "pcsea")
    )
    if config.no_dimension_reduction or len(archive) < 2:
        rmap = ReductionMap.identity(spec.n)
    else:
        rmap = reduce_dimensions(archive.X, config.alpha)
        if rmap.degenerate or rmap.k == 0:
            log.warning("reduction removed every variable; using the identity map")
            rmap = ReductionMap.identity(spec.n)
    vectors = map_vectors(config.vectors(), archive.F)
    return rmap, archive, vectors


GenerationHook = Callable[[int, Population, ReferenceVectorSet], bool | None]


def run(config: RunConfig, on_generation: GenerationHook | None = None) -> RunResult:
    """Execute one seeded run.

    ``on_generation(t, population, vectors)`` is called after initialisation
    (t = 0) and after every environmental selection; returning ``True``
    stops the run early.
    """
    spec, T = config.spec, config.T
    rmap, archive, vectors = prepare(config)
    r0 = vectors.r0
    N = len(r0)
    if config.eval_budget < T * N:
        raise ValueError(f"eval_budget {config.eval_budget} below population size {T * N}")
    ev = _Evaluator(spec, rmap, config.eval_budget)

    init = rng_stream(config.seed, "init").random((T * N, spec.n))
    pop = ev(init[:, rmap.retained] - rmap.mu[rmap.retained], 0)
    trace: list[GenerationRecord] = []
    stopped_by = "t_max"
    front = nondominated_mask(pop.F)
    pop.front = front
    halt = bool(on_generation and on_generation(0, pop, vectors))
    t = 0
    while not halt and (config.t_max is None or t < config.t_max):
        if ev.left <= 0:
            stopped_by = "budget"
            break
        if config.no_diversity_repair:
            R, info = ev(np.empty((0, rmap.k)), t), {"unassigned": 0, "skipped": 0}
        else:
            Zr, info = repair_diversity(
                pop, vectors, T, config.beta, config.gamma,
                rng_stream(config.seed, "repair", t), config.noise, front,
            )
            R = ev(Zr, t)
        PR = Population.concat(pop, R)
        front = np.concatenate(extend_front(pop.F, R.F, front))
        S = PR.take(np.flatnonzero(front))
        vectors = map_vectors(r0, S.F)
        Zq = generate_offspring(
            S, vectors, T, config.beta, config.gamma,
            rng_stream(config.seed, "offspring", t), config.noise,
        )
        Q = ev(Zq, t)
        U = Population.concat(PR, Q)
        front = np.concatenate(extend_front(PR.F, Q.F, front))
        vectors = map_vectors(r0, U.F[front])
        sel = environmental_selection(U.F, vectors, T, front)
        pop = U.take(sel)
        # selected front members stay non-dominated; only the rest needs checking
        kept = front[sel]
        rest_front = extend_front(pop.F[kept], pop.F[~kept], np.ones(kept.sum(), bool))[1]
        front = kept.copy()
        front[np.flatnonzero(~kept)[rest_front]] = True
        t += 1
        pop.generation, pop.evaluations, pop.front = t, ev.used, front
        trace.append(
            GenerationRecord(
                t, ev.used, len(R), len(Q), info["unassigned"], info["skipped"],
                int(front.sum()),
            )
        )
        if on_generation and on_generation(t, pop, vectors):
            stopped_by = "hook"
            break
        if ev.left <= 0:
            stopped_by = "budget"
            break
    final = pop.take(final_selection(pop.F, vectors, front))
    ledger = {
        "pcsea": archive.evaluations_used,
        "main": ev.used,
        "total": archive.evaluations_used + ev.used,
        "generations": t,
    }
    return RunResult(config, final, pop, vectors, rmap, archive, trace, ledger, stopped_by)
