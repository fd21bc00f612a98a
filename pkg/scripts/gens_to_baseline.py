#!/usr/bin/env python3
"""Generations needed with and without dimension reduction on 8-objective DTLZ1.

Without ``--baseline`` each seed's target is the with-reduction final HV
after ``--cap`` generations (default 200). Output:
results/gens_to_baseline/gens_to_baseline.csv.
"""
import sys

from maoeda.cli import main

DEFAULTS = [
    "--problem", "dtlz1",
    "--objectives", "8",
    "--runs", "3",
    "--cap", "200",
    "--out", "results/gens_to_baseline",
]

if __name__ == "__main__":
    sys.exit(main(["gens-to-baseline", *DEFAULTS, *sys.argv[1:]]))
