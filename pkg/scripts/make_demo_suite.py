#!/usr/bin/env python3
"""Render a small demo dataset (images, GT masks, manifest) for hand testing.

Usage: python3 scripts/make_demo_suite.py [OUTDIR] [COUNT]

Defaults: OUTDIR=demo_suite, COUNT=8. The result is ready for
`pointmask batch OUTDIR/manifest.jsonl ...` or as the --root of the
annotation service.
"""

import sys

from pointmask.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "demo_suite"
    count = sys.argv[2] if len(sys.argv) > 2 else "8"
    sys.exit(main([
        "make-suite",
        "--count", count,
        "--width", "64", "--height", "64",
        "--sigma-t", "1.5,2.5",
        "--scr", "6.0,12.0",
        "--tau", "0.3",
        "--out", out,
    ]))
