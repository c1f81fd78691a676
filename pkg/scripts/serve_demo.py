#!/usr/bin/env python3
"""Render a demo dataset if needed and serve it for interactive annotation.

Usage: python3 scripts/serve_demo.py [ROOT] [PORT]

Defaults: ROOT=demo_suite (created on first run), PORT=8008.
"""

import sys
from pathlib import Path

from pointmask import service
from pointmask.cli import main as cli_main

if __name__ == "__main__":
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_suite")
    port = sys.argv[2] if len(sys.argv) > 2 else "8008"
    if not (root / "manifest.jsonl").exists():
        rc = cli_main([
            "make-suite", "--count", "8", "--width", "64", "--height", "64",
            "--sigma-t", "1.5,2.5", "--scr", "6.0,12.0", "--tau", "0.3",
            "--out", str(root),
        ])
        if rc != 0:
            sys.exit(rc)
    args = ["--root", str(root), "--port", port]
    ui = Path(__file__).resolve().parent.parent / "frontend"
    if (ui / "index.html").exists() and (ui / "dist" / "main.js").exists():
        args += ["--ui", str(ui)]
    else:
        print("frontend not built (run: cd frontend && tsc -p .); serving API only",
              file=sys.stderr)
    sys.exit(service.main(args))
