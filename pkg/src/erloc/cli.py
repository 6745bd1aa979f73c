"""Command-line entry point: ``erloc <kind> --config cfg.json``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ErlocError, NumericError
from .harness import KIND_HELP, KINDS, parse_config, run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erloc",
        description="Run a reproducible spectral experiment on sparse random graphs.")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind in KINDS:
        p = sub.add_parser(kind, help=KIND_HELP[kind], description=KIND_HELP[kind])
        p.add_argument("--config", help="path to a JSON config or an inline JSON object")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, default=1, help="worker processes across seeds")
        p.add_argument("--seed-override", type=int, help="run this single seed instead")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = {"kind": args.kind}
        if args.config:
            cfg = parse_config(args.config)
            raw = {k: v for k, v in json.loads(json.dumps(cfg.echo())).items()}
            raw["out"] = cfg.out
            if cfg.kind != args.kind:
                raise ErlocError(f"config kind {cfg.kind!r} does not match subcommand {args.kind!r}")
        if args.out:
            raw["out"] = args.out
        if args.seed_override is not None:
            raw["seeds"] = [args.seed_override]
        cfg = parse_config({k: v for k, v in raw.items() if v is not None})
        records = run_experiment(cfg, threads=max(1, args.threads))
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ErlocError, ValueError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for rec in records:
        print(json.dumps({"run_id": rec.run_id, "seed": rec.seed, "summary": rec.summary,
                          "wall_time": round(rec.wall_time, 3)}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
