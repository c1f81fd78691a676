#!/usr/bin/env python3
"""Run every experiment table at its frozen defaults into one output tree.

Usage: python3 scripts/run_experiments.py [OUTDIR]

Produces OUTDIR/{seed,rs,k,ablation,boundary}/ with JSON + CSV + SVG
artifacts, the same tables the acceptance gate checks. Takes a couple of
minutes total on one core.
"""

import sys
import time

from pointmask.cli import main

RUNS = [
    ("seed", ["sweep-seed"]),
    ("rs", ["sweep-rs", "--mode", "rs"]),
    ("k", ["sweep-rs", "--mode", "k"]),
    ("ablation", ["ablate"]),
    ("boundary", ["boundary"]),
]

if __name__ == "__main__":
    root = sys.argv[1] if len(sys.argv) > 1 else "experiments"
    for name, argv in RUNS:
        t0 = time.perf_counter()
        rc = main([*argv, "--out", f"{root}/{name}"])
        print(f"# {name}: exit {rc} in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        if rc != 0:
            sys.exit(rc)
    sys.exit(0)
