"""Command-line entry point: ``gbsmit <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .experiments import RUNNERS, ConfigError, run
from .extrapolation import PoleCrossingError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_SEEDED = {"table3", "fig2", "fig3"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gbsmit", description="Photon-loss mitigation experiments for Gaussian boson sampling.")
    parser.add_argument("experiment", choices=sorted(RUNNERS))
    parser.add_argument("--config", type=Path, help="JSON file of parameter overrides")
    parser.add_argument("--out", type=Path, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit) for stochastic experiments")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for independent evaluations")
    return parser


def _load_overrides(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("GBSMIT_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        overrides = _load_overrides(args.config)
        if args.seed is not None:
            if args.experiment not in _SEEDED:
                raise ConfigError(f"experiment {args.experiment} is deterministic and takes no seed")
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            overrides["seed"] = args.seed
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        table = run(args.experiment, overrides, threads=args.threads)
    except ConfigError as exc:
        print(f"gbsmit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PoleCrossingError, np.linalg.LinAlgError) as exc:
        print(f"gbsmit: numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = table.to_csv() if args.format == "csv" else table.to_json()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
