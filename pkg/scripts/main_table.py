#!/usr/bin/env python3
"""Standard comparison grid: DTLZ1-4 and their minus variants, M in {3,5,8,10,15}.

Extra arguments are passed to ``maoeda run`` and override the defaults, e.g.
``python scripts/main_table.py --runs 5 --objectives 3,5 --jobs 4``.
"""
import sys

from maoeda.cli import main

DEFAULTS = [
    "--problem", "dtlz1,dtlz2,dtlz3,dtlz4,dtlz1m,dtlz2m,dtlz3m,dtlz4m",
    "--objectives", "3,5,8,10,15",
    "--runs", "30",
    "--out", "results/main_table",
]

if __name__ == "__main__":
    sys.exit(main(["run", *DEFAULTS, *sys.argv[1:]]))
