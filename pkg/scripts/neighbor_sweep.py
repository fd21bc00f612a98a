#!/usr/bin/env python3
"""IGD against neighbour size T in 5..50 (step 5); writes results/sweep_t/sweep.csv."""
import sys

from maoeda.cli import main

DEFAULTS = [
    "--values", "5:50:5",
    "--problem", "dtlz1,dtlz2,dtlz3,dtlz4",
    "--objectives", "3,5,8,10,15",
    "--runs", "30",
    "--out", "results/sweep_t",
]

if __name__ == "__main__":
    sys.exit(main(["sweep-t", *DEFAULTS, *sys.argv[1:]]))
