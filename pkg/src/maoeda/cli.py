"""Command line: ``run``, ``sweep-t`` and ``gens-to-baseline``.

Options may also come from a ``key=value`` file passed with ``--config``
(one pair per line, ``#`` starts a comment, keys use the long option names
with dashes or underscores). Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (
    GENERATION_CAP,
    ExperimentPlan,
    Mode,
    generations_to_baseline,
    neighbor_sweep,
    reduction_speedup,
    run_experiment,
    write_csv,
    write_outputs,
)

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def read_config(path) -> dict[str, str]:
    """Parse a ``key=value`` file into a dict of raw strings."""
    out = {}
    for num, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{num}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def parse_range(text: str) -> list[int]:
    """``5:50:5`` (inclusive) or ``5,10,25``."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise ValueError("range step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _csv_list(text: str) -> list[str]:
    return [p.strip() for p in str(text).split(",") if p.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with option defaults")
    p.add_argument("--problem", default="dtlz2", help="comma list, e.g. dtlz1,dtlz2m")
    p.add_argument("--objectives", default="3", help="comma list of M values")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--t", type=int, default=25, help="neighbour size T")
    p.add_argument("--alpha", type=float, default=0.96)
    p.add_argument("--beta", type=float, default=0.96)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--no-diversity-repair", action="store_true")
    p.add_argument("--no-dimension-reduction", action="store_true")
    p.add_argument("--budget-total", type=int, default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--pcsea-pop", type=int, default=None)
    p.add_argument("--pcsea-gens", type=int, default=None)
    p.add_argument("--hv-samples", type=int, default=100_000)
    p.add_argument("--igd-points", type=int, default=10_000)
    p.add_argument("--front-dir", default=None, help="directory of minus-problem front files")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maoeda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a problem x objectives grid")
    _common(p_run)
    p_run.add_argument(
        "--mode",
        default="standard",
        choices=[Mode.STANDARD.value, Mode.ABLATE_REPAIR.value, Mode.ABLATE_REDUCTION.value],
    )
    p_sweep = sub.add_parser("sweep-t", help="IGD versus neighbour size")
    _common(p_sweep)
    p_sweep.add_argument("--values", default="5:50:5")
    p_gens = sub.add_parser("gens-to-baseline", help="generations until the HV baseline is met")
    _common(p_gens)
    p_gens.add_argument("--baseline", type=float, default=None,
                        help="target HV fraction; omitted: the with-reduction final HV")
    p_gens.add_argument("--cap", type=int, default=None)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {a.dest: a for a in sub._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in values.items():
        if key not in known or key == "config":
            raise ValueError(f"unknown config key {key!r}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):  # noqa: SLF001
            low = raw.lower()
            if low not in _BOOL_TRUE | _BOOL_FALSE:
                raise ValueError(f"config key {key!r} needs a boolean, got {raw!r}")
            defaults[key] = low in _BOOL_TRUE
        else:
            defaults[key] = action.type(raw) if action.type else raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def plan_from_args(args, mode: Mode) -> ExperimentPlan:
    return ExperimentPlan(
        problems=_csv_list(args.problem),
        objectives=[int(m) for m in _csv_list(args.objectives)],
        runs=args.runs,
        seed=args.seed,
        mode=mode,
        T=args.t,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        no_diversity_repair=args.no_diversity_repair,
        no_dimension_reduction=args.no_dimension_reduction,
        budget_total=args.budget_total,
        t_max=args.t_max,
        pcsea_pop=args.pcsea_pop,
        pcsea_gens=args.pcsea_gens,
        hv_samples=args.hv_samples,
        igd_points=args.igd_points,
        front_dir=args.front_dir,
    )


def _cmd_run(args) -> int:
    plan = plan_from_args(args, Mode(args.mode))
    result = run_experiment(plan, jobs=args.jobs)
    out = write_outputs(result, args.out)
    for row in result.summary:
        print(f"{row['problem']:>7} M={row['M']:<3} {row['variant']:<14} HV {row['hv_cell']:<18} "
              f"IGD {row['igd_cell']:<18} {row['symbol']}")
    print(f"wrote {out}/results.csv, summary.csv, results.json")
    return 1 if result.failures else 0


def _cmd_sweep(args) -> int:
    plan = plan_from_args(args, Mode.NEIGHBOR_SWEEP)
    rows, records = neighbor_sweep(plan, parse_range(args.values), jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", rows)
    write_csv(out / "results.csv", [r.row() for r in records], list(records[0].CSV_FIELDS))
    for row in rows:
        print(f"{row['problem']:>7} M={row['M']:<3} T={row['T']:<3} IGD {row['igd_median']:.4g}")
    return 1 if any(not r.ok for r in records) else 0


def _cmd_gens(args) -> int:
    plan = plan_from_args(args, Mode.GENERATIONS_TO_BASELINE)
    rows, failed = [], 0
    for problem in plan.problems:
        for M in plan.objectives:
            for r in range(plan.runs):
                cfg = plan.config(problem, M, r)
                try:
                    if args.baseline is None:
                        cap = args.cap or plan.config(problem, M, r).t_max
                        row = reduction_speedup(cfg, cap, plan.hv_samples)
                    else:
                        res = generations_to_baseline(
                            cfg, args.baseline, args.cap or GENERATION_CAP, plan.hv_samples
                        )
                        row = {"seed": cfg.seed, "baseline": res.baseline,
                               "generations": res.generations, "reached": res.reached}
                    row = {"problem": problem.lower(), "M": M, "run": r, **row, "status": "ok"}
                except Exception as exc:
                    failed += 1
                    row = {"problem": problem.lower(), "M": M, "run": r, "seed": cfg.seed,
                           "status": f"error: {type(exc).__name__}: {exc}"}
                rows.append(row)
                print(row)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = sorted({k for row in rows for k in row}, key=lambda k: (k not in ("problem", "M", "run", "seed"), k))
    write_csv(out / "gens_to_baseline.csv", [{k: row.get(k, "") for k in fields} for row in rows], fields)
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = _apply_config(parser, argv)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        handler = {"run": _cmd_run, "sweep-t": _cmd_sweep, "gens-to-baseline": _cmd_gens}
        return handler[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
