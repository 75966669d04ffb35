#!/usr/bin/env python3
"""Run every bundled experiment config and print a one-line summary each.

Usage: python scripts/reproduce_all.py [--out DIR]
"""

import argparse
import sys
import time
from pathlib import Path

from cornerwave.pipeline import load_config, run

CONFIGS = [
    ("table1.yaml", True),
    ("stokes.yaml", False),
    ("corner_beta2.yaml", False),
    ("corner_alpha2.yaml", False),
    ("corner_type3.yaml", False),
    ("blowup_convergence.yaml", False),
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out", help="output root directory")
    args = parser.parse_args()
    root = Path(__file__).resolve().parent.parent
    for name, oracle_only in CONFIGS:
        cfg = load_config(root / "configs" / name)
        cfg.outputs.directory = str(Path(args.out) / Path(cfg.outputs.directory).name)
        t0 = time.monotonic()
        manifest = run(cfg, oracle_only=oracle_only)
        dt = time.monotonic() - t0
        verdict = manifest.get("classification", "-")
        print(f"{name:28s} {dt:7.1f}s  verdict={verdict}  files={len(manifest['outputs'])}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
