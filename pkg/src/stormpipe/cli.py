"""Command line entry point.

Usage:

    stormpipe <stage> --config pipeline.json [--threads N] [--seed S]
              [--workdir DIR] [--set key=value ...]
    stormpipe synth --preset tiny --out data/tiny [--seed S]

Stages run in a fixed order; ``all`` runs every stage. Exit codes: 0 on
success, 2 for configuration problems, 3 when a required upstream artifact
is missing or fails its manifest hash.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, PipelineConfig
from .pipeline import STAGE_ORDER, UpstreamError, run_stage
from .synth import PRESETS, generate_synthetic_corpus, write_synthetic_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UPSTREAM = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormpipe",
        description="Detect sustained multi-outlet news storms in an article corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for stage in (*STAGE_ORDER, "all"):
        sp = sub.add_parser(stage, help=f"run the {stage} stage" if stage != "all" else "run every stage in order")
        sp.add_argument("--config", required=True, help="path to a JSON pipeline config")
        sp.add_argument("--threads", type=int, default=None, help="scoring worker threads")
        sp.add_argument("--seed", type=int, default=None, help="seed for any randomized step")
        sp.add_argument("--workdir", default=None, help="artifact directory (overrides config)")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any config field (repeatable)",
        )

    synth = sub.add_parser("synth", help="generate a synthetic corpus with known ground truth")
    synth.add_argument("--preset", required=True, choices=sorted(PRESETS), help="dataset recipe")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=0, help="generator seed")
    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config)
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        config.apply_override(key.strip(), raw)
    if args.workdir is not None:
        config.workdir = args.workdir
    if args.threads is not None:
        config.threads = args.threads
    if args.seed is not None:
        config.seed = args.seed
    return config


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "synth":
            spec = PRESETS[args.preset]()
            dataset = generate_synthetic_corpus(spec, seed=args.seed)
            paths = write_synthetic_dataset(dataset, args.out)
            summary = {
                "preset": args.preset,
                "seed": args.seed,
                "articles": len(dataset.corpus),
                "planted_storms": len(dataset.ground_truth.storms),
                "planted_near_misses": len(dataset.ground_truth.near_misses),
                "files": {k: str(v) for k, v in sorted(paths.items())},
            }
            print(json.dumps(summary, indent=2))
            return EXIT_OK

        config = _load_config(args)
        results = run_stage(config, args.command)
        for res in results:
            print(f"{res.stage}: {json.dumps(res.counts, sort_keys=True)} ({res.wall_time_s:.2f}s)")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UpstreamError as exc:
        print(f"upstream error: {exc}", file=sys.stderr)
        return EXIT_UPSTREAM


if __name__ == "__main__":
    sys.exit(main())
