"""Regularity-model EDA for many-objective optimisation with decision-space reduction."""

from .evolution import RunConfig, RunResult, run
from .harness import ExperimentPlan, Mode, run_experiment
from .problems import ProblemSpec, evaluate

__all__ = [
    "ExperimentPlan",
    "Mode",
    "ProblemSpec",
    "RunConfig",
    "RunResult",
    "evaluate",
    "run",
    "run_experiment",
]
