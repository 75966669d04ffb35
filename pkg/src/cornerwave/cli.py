"""Command-line interface.

    cornerwave run      --config cfg.yaml [--out DIR] [--format csv,json,svg]
    cornerwave solve    --config cfg.yaml ...
    cornerwave analyze  --config cfg.yaml ...
    cornerwave classify --config cfg.yaml ...
    cornerwave table1   --config cfg.yaml ...
    cornerwave run      --config cfg.yaml --oracle-only

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 analysis
error.  Failures leave a machine-readable error.json in the output
directory naming the failing stage.
"""

from __future__ import annotations

import argparse
import sys

from .pipeline import (AnalysisError, ConfigError, SolverError, load_config,
                       run, write_error_record)

STAGES = {
    "run": ("solve", "analyze", "classify", "table1"),
    "solve": ("solve",),
    "analyze": ("analyze",),
    "classify": ("classify",),
    "table1": ("table1",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornerwave",
        description="degenerate Bernoulli free-boundary laboratory")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in STAGES:
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="YAML/JSON config file")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--format", default=None,
                       help="comma-separated subset of csv,json,svg")
        p.add_argument("--oracle-only", action="store_true",
                       help="skip the solver; emit oracle artifacts only")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outdir = args.out or "out"
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.outputs.directory = args.out
        if args.format:
            fmts = tuple(f.strip() for f in args.format.split(",") if f.strip())
            cfg.outputs.formats = fmts
            for f in fmts:
                if f not in ("csv", "json", "svg"):
                    raise ConfigError(f"unknown output format {f!r}")
        outdir = cfg.outputs.directory
        manifest = run(cfg, stages=STAGES[args.verb],
                       oracle_only=args.oracle_only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        write_error_record(outdir, "config", exc)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        write_error_record(outdir, "solve", exc)
        return 3
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        write_error_record(outdir, "analysis", exc)
        return 4
    for key, name in manifest.get("outputs", {}).items():
        print(f"{key}: {name}")
    if "classification" in manifest:
        print(f"verdict: {manifest['classification']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
