#!/usr/bin/env python3
"""Repair and reduction ablations on the DTLZ suite (200-generation studies).

Writes ``results/ablate_repair`` and ``results/ablate_reduction``; each
summary.csv row carries the rank-sum symbol of the full algorithm against
the ablated variant. Extra arguments override the defaults.
"""
import sys

from maoeda.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    codes = []
    for mode in ("ablate_repair", "ablate_reduction"):
        args = [
            "run", "--mode", mode,
            "--problem", "dtlz1,dtlz2,dtlz3,dtlz4,dtlz1m,dtlz2m,dtlz3m,dtlz4m",
            "--objectives", "3,5,8,10,15",
            "--runs", "30",
            "--out", f"results/{mode}",
            *extra,
        ]
        codes.append(main(args))
    sys.exit(max(codes))
