"""Experiment orchestration: run grids, ablations, the neighbour-size sweep and
the generations-to-baseline protocol, with CSV/JSON reporting.

Column reference for the files written by :func:`write_outputs`:

``results.csv`` (one row per run)
    problem, M, variant, run, seed, T, status, hv, hv_method, hv_excluded,
    igd, generations, evals_pcsea, evals_main, evals_total, budget_total,
    removed, k, stopped_by
``summary.csv`` (one row per problem, M and variant)
    problem, M, variant, runs_ok, runs_failed, hv_median, hv_dispersion,
    hv_cell, igd_median, igd_dispersion, igd_cell, symbol

``hv`` is the normalised hypervolume divided by the reference-box volume
(1.1^M), so it lies in [0, 1]. ``*_dispersion`` is half the interquartile
range and ``*_cell`` prints ``median(dispersion)``. ``symbol`` compares the
reference variant (first listed) against the row's variant with a 5%
rank-sum test on HV: ``+`` the reference is better, ``-`` worse, ``=`` no
significant difference.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .evolution import RunConfig, final_selection, rng_stream, run
from .metrics import SYMBOL, dispersion, format_cell, hypervolume, igd, normalize, rank_sum_test
from .problems import ProblemSpec, sample_front, true_bounds

log = logging.getLogger(__name__)

# total, corner search, main loop
TABLE_II = {
    3: (72_000, 15_000, 57_000),
    5: (130_000, 25_000, 100_000),
    8: (250_000, 40_000, 210_000),
    10: (220_000, 50_000, 170_000),
    15: (410_000, 75_000, 330_000),
}
STUDY_GENERATIONS = 200  # generation cap of the studies outside the main table
RELATIVE_TOL = 1e-4
GENERATION_CAP = 500
NO_BUDGET = 10**12


class Mode(str, enum.Enum):
    STANDARD = "standard"
    ABLATE_REPAIR = "ablate_repair"
    ABLATE_REDUCTION = "ablate_reduction"
    NEIGHBOR_SWEEP = "neighbor_sweep"
    GENERATIONS_TO_BASELINE = "generations_to_baseline"


VARIANTS = {
    Mode.STANDARD: ("standard",),
    Mode.ABLATE_REPAIR: ("standard", "no_repair"),
    Mode.ABLATE_REDUCTION: ("standard", "no_reduction"),
    Mode.NEIGHBOR_SWEEP: ("standard",),
    Mode.GENERATIONS_TO_BASELINE: ("standard",),
}


@dataclass
class ExperimentPlan:
    """What to run.

    ``None`` fields take mode-dependent defaults: the main comparison uses
    Table II budgets with a 50-generation corner search; the studies cap
    both the corner search and the main loop at 200 generations and lift
    the evaluation cap.
    """

    problems: list[str] = field(default_factory=lambda: ["dtlz2"])
    objectives: list[int] = field(default_factory=lambda: [3])
    runs: int = 30
    seed: int = 42
    mode: Mode = Mode.STANDARD
    T: int = 25
    alpha: float = 0.96
    beta: float = 0.96
    gamma: float = 0.5
    no_diversity_repair: bool = False
    no_dimension_reduction: bool = False
    budget_total: int | None = None
    t_max: int | None = None
    pcsea_pop: int | None = None
    pcsea_gens: int | None = None
    hv_samples: int = 100_000
    igd_points: int = 10_000
    front_dir: str | None = None

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for M in self.objectives:
            if M < 2:
                raise ValueError(f"bad objective count {M}")

    @property
    def study(self) -> bool:
        return self.mode is not Mode.STANDARD

    def variants(self) -> tuple[str, ...]:
        if self.mode is Mode.STANDARD and (self.no_diversity_repair or self.no_dimension_reduction):
            parts = ["no_repair"] * self.no_diversity_repair + ["no_reduction"] * self.no_dimension_reduction
            return ("+".join(parts),)
        return VARIANTS[self.mode]

    def budgets(self, M: int) -> tuple[int, int, int] | None:
        if self.budget_total is not None:
            return (self.budget_total, 0, 0)
        return TABLE_II.get(M)

    def config(self, problem: str, M: int, run_index: int, variant: str = "standard", T=None) -> RunConfig:
        spec = ProblemSpec.from_name(problem, M)
        pop = self.pcsea_pop or (200 if self.study and M > 10 else 100)
        gens = self.pcsea_gens or (STUDY_GENERATIONS if self.study else 50)
        t_max = self.t_max if self.t_max is not None else (STUDY_GENERATIONS if self.study else None)
        pcsea_evals = pop * (gens + 1)
        if self.budget_total is not None:
            budget = self.budget_total - pcsea_evals
        elif self.study:
            budget = NO_BUDGET
        elif M in TABLE_II:
            budget = TABLE_II[M][2]
        else:
            raise ValueError(f"no default budget for M={M}; pass budget_total")
        return RunConfig(
            spec,
            T=T or self.T,
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            t_max=t_max,
            eval_budget=budget,
            seed=self.seed + run_index,
            no_diversity_repair=self.no_diversity_repair or "no_repair" in variant,
            no_dimension_reduction=self.no_dimension_reduction or "no_reduction" in variant,
            pcsea_pop=pop,
            pcsea_gens=gens,
        )


@dataclass
class RunRecord:
    problem: str
    M: int
    variant: str
    run: int
    seed: int
    T: int
    status: str = "ok"
    hv: float = math.nan
    hv_method: str = ""
    hv_excluded: int = 0
    igd: float = math.nan
    generations: int = 0
    evals_pcsea: int = 0
    evals_main: int = 0
    evals_total: int = 0
    budget_total: int = 0
    removed: str = ""
    k: int = 0
    stopped_by: str = ""
    wall_time: float = 0.0
    final_F: np.ndarray | None = None
    trace: list = field(default_factory=list)

    CSV_FIELDS = (
        "problem", "M", "variant", "run", "seed", "T", "status", "hv", "hv_method",
        "hv_excluded", "igd", "generations", "evals_pcsea", "evals_main", "evals_total",
        "budget_total", "removed", "k", "stopped_by",
    )

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_FIELDS}


# -- indicators --------------------------------------------------------------

_FRONT_CACHE: dict = {}


def reference_front(spec: ProblemSpec, count: int, seed: int, front_dir=None) -> np.ndarray | None:
    """Sampled true front used for IGD, or ``None`` when no recipe exists."""
    key = (spec.name, spec.M, count, seed, str(front_dir))
    if key not in _FRONT_CACHE:
        path = None
        if spec.id.is_minus:
            path = Path(front_dir or ".") / f"{spec.name}_M{spec.M}.front"
            if not path.exists():
                _FRONT_CACHE[key] = None
                return None
        _FRONT_CACHE[key] = sample_front(spec, count, np.random.default_rng(seed), path)
    return _FRONT_CACHE[key]


def score(spec: ProblemSpec, F: np.ndarray, seed: int, plan: ExperimentPlan) -> dict:
    lo, hi = true_bounds(spec)
    Fn = normalize(F, lo, hi)
    hv = hypervolume(Fn, rng=rng_stream(seed, "mc-hv"), samples=plan.hv_samples)
    out = {"hv": hv.value, "hv_method": hv.method, "hv_excluded": hv.excluded, "igd": math.nan}
    ref = reference_front(spec, plan.igd_points, plan.seed, plan.front_dir)
    if ref is not None:
        out["igd"] = igd(Fn, normalize(ref, lo, hi))
    return out


def normalized_hv(spec: ProblemSpec, F: np.ndarray, seed: int, samples: int = 100_000) -> float:
    lo, hi = true_bounds(spec)
    return hypervolume(normalize(F, lo, hi), rng=rng_stream(seed, "mc-hv"), samples=samples).value


# -- single runs -------------------------------------------------------------


def _execute(task) -> RunRecord:
    plan, problem, M, variant, r, T = task
    cfg = plan.config(problem, M, r, variant, T)
    rec = RunRecord(problem.lower(), M, variant, r, cfg.seed, cfg.T)
    t0 = time.perf_counter()
    try:
        res = run(cfg)
        rec.final_F = res.final.F
        rec.trace = res.trace
        rec.generations = res.ledger["generations"]
        rec.evals_pcsea = res.ledger["pcsea"]
        rec.evals_main = res.ledger["main"]
        rec.evals_total = res.ledger["total"]
        rec.removed = " ".join(str(j) for j in res.reduction.removed)
        rec.k = res.reduction.k
        rec.stopped_by = res.stopped_by
        budget = plan.budgets(M)
        rec.budget_total = budget[0] if budget and not plan.study else 0
        for key, val in score(cfg.spec, res.final.F, cfg.seed, plan).items():
            setattr(rec, key, val)
    except Exception as exc:  # recorded; the grid continues
        log.error("run %s M=%d %s #%d failed: %s", problem, M, variant, r, exc)
        rec.status = f"error: {type(exc).__name__}: {exc}"
        log.debug(traceback.format_exc())
    rec.wall_time = time.perf_counter() - t0
    return rec


def _map(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute, tasks))


def _sort_key(variants):
    def key(rec: RunRecord):
        return (rec.problem, rec.M, rec.T, variants.index(rec.variant), rec.seed)

    return key


# -- experiments -------------------------------------------------------------


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    records: list[RunRecord]
    summary: list[dict]

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.records)


def summarize(records: list[RunRecord], variants: tuple[str, ...]) -> list[dict]:
    cells: dict = {}
    for rec in records:
        cells.setdefault((rec.problem, rec.M), {}).setdefault(rec.variant, []).append(rec)
    rows = []
    for (problem, M), by_variant in sorted(cells.items()):
        ref = [r.hv for r in by_variant.get(variants[0], []) if r.ok]
        for variant in variants:
            recs = by_variant.get(variant, [])
            ok = [r for r in recs if r.ok]
            hv = np.array([r.hv for r in ok])
            ig = np.array([r.igd for r in ok])
            symbol = ""
            if variant != variants[0] and len(ref) >= 3 and len(hv) >= 3:
                symbol = SYMBOL[rank_sum_test(ref, hv)]
            rows.append(
                {
                    "problem": problem,
                    "M": M,
                    "variant": variant,
                    "runs_ok": len(ok),
                    "runs_failed": len(recs) - len(ok),
                    "hv_median": float(np.median(hv)) if len(hv) else math.nan,
                    "hv_dispersion": dispersion(hv) if len(hv) else math.nan,
                    "hv_cell": format_cell(hv),
                    "igd_median": float(np.median(ig)) if len(ig) else math.nan,
                    "igd_dispersion": dispersion(ig) if len(ig) else math.nan,
                    "igd_cell": format_cell(ig),
                    "symbol": symbol,
                }
            )
    return rows


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> ExperimentResult:
    """Every run of the problems x objectives x variants grid."""
    variants = plan.variants()
    tasks = [
        (plan, p, M, v, r, None)
        for p in plan.problems
        for M in plan.objectives
        for v in variants
        for r in range(plan.runs)
    ]
    records = sorted(_map(tasks, jobs), key=_sort_key(variants))
    return ExperimentResult(plan, records, summarize(records, variants))


def neighbor_sweep(plan: ExperimentPlan, T_values, jobs: int = 1) -> tuple[list[dict], list[RunRecord]]:
    """One run set per neighbour size; IGD and HV medians per (problem, M, T)."""
    T_values = [int(t) for t in T_values]
    if not T_values:
        raise ValueError("T values must be nonempty")
    plan = replace(plan, mode=Mode.NEIGHBOR_SWEEP)
    tasks = [
        (plan, p, M, "standard", r, T)
        for p in plan.problems
        for M in plan.objectives
        for T in T_values
        for r in range(plan.runs)
    ]
    records = sorted(_map(tasks, jobs), key=_sort_key(("standard",)))
    rows = []
    for p in plan.problems:
        for M in plan.objectives:
            for T in T_values:
                ok = [r for r in records if r.ok and r.problem == p.lower() and r.M == M and r.T == T]
                ig = np.array([r.igd for r in ok])
                hv = np.array([r.hv for r in ok])
                rows.append(
                    {
                        "problem": p.lower(),
                        "M": M,
                        "T": T,
                        "runs_ok": len(ok),
                        "igd_median": float(np.median(ig)) if len(ig) else math.nan,
                        "igd_dispersion": dispersion(ig) if len(ig) else math.nan,
                        "hv_median": float(np.median(hv)) if len(hv) else math.nan,
                    }
                )
    return rows, records


# -- generations to baseline -------------------------------------------------


@dataclass
class BaselineResult:
    generations: int
    reached: bool
    hv_trace: list[float]
    baseline: float


def relative_error(value: float, baseline: float) -> float:
    return abs(value - baseline) / baseline


def generations_to_baseline(config: RunConfig, baseline: float, cap: int = GENERATION_CAP, samples: int = 100_000) -> BaselineResult:
    """First generation whose final-selection HV is within 1e-4 (relative) of ``baseline``.

    The run stops as soon as the target is met; otherwise it runs ``cap``
    generations and the cap is returned with ``reached=False``.
    """
    if not baseline > 0:
        raise ValueError("baseline must be > 0 (relative error undefined)")
    trace: list[float] = []
    hit: list[int] = []

    def hook(t, pop, vectors):
        F = pop.F[final_selection(pop.F, vectors, pop.front)]
        trace.append(normalized_hv(config.spec, F, config.seed, samples))
        if relative_error(trace[-1], baseline) <= RELATIVE_TOL:
            hit.append(t)
            return True
        return False

    run(replace(config, t_max=cap), hook)
    if hit:
        return BaselineResult(hit[0], True, trace, baseline)
    return BaselineResult(cap, False, trace, baseline)


def reduction_speedup(config: RunConfig, cap: int = STUDY_GENERATIONS, samples: int = 100_000) -> dict:
    """Generations each variant needs to reach the with-reduction final HV.

    The baseline is the final-selection HV after ``cap`` generations of the
    run with dimension reduction. Its own count is read from the same run's
    trace, then the run without reduction is measured against it.
    """
    with_cfg = replace(config, no_dimension_reduction=False, t_max=cap)
    sets: list[np.ndarray] = []

    def keep(t, pop, vectors):
        sets.append(pop.F[final_selection(pop.F, vectors, pop.front)])

    run(with_cfg, keep)
    baseline = normalized_hv(config.spec, sets[-1], config.seed, samples)
    out = {"seed": config.seed, "baseline": baseline}
    if not baseline > 0:
        out.update(with_reduction=cap, without_reduction=cap, reached_with=False, reached_without=False)
        return out
    # the last set is the baseline itself, so this always terminates
    count = next(
        t
        for t, F in enumerate(sets)
        if relative_error(normalized_hv(config.spec, F, config.seed, samples), baseline) <= RELATIVE_TOL
    )
    other = generations_to_baseline(replace(config, no_dimension_reduction=True), baseline, cap, samples)
    out.update(
        with_reduction=count,
        without_reduction=other.generations,
        reached_with=True,
        reached_without=other.reached,
    )
    return out


# -- output ------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def write_csv(path, rows: list[dict], fields=None) -> None:
    fields = fields or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in fields})


def _json_safe(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_outputs(result: ExperimentResult, out_dir) -> Path:
    """results.csv, summary.csv, results.json and per-run traces under ``out_dir``."""
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    rows = [r.row() for r in result.records]
    write_csv(out / "results.csv", rows, list(RunRecord.CSV_FIELDS))
    write_csv(out / "summary.csv", result.summary)
    doc = {"plan": asdict(result.plan), "runs": rows, "summary": result.summary}
    (out / "results.json").write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n")
    for r in result.records:
        if r.trace:
            name = f"{r.problem}_M{r.M}_{r.variant}_T{r.T}_run{r.run}.csv"
            write_csv(out / "traces" / name, [asdict(g) for g in r.trace])
    timing = {f"{r.problem}_M{r.M}_{r.variant}_T{r.T}_run{r.run}": r.wall_time for r in result.records}
    (out / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    return out
