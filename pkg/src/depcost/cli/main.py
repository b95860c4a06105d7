"""Command-line entry point: ``depcost <command> [--config FILE] [--seed N] [--jobs N] [--out DIR]``."""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, DataError, DepcostError
from . import commands
from .config import load_config

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PARTIAL = 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (defaults are packaged)")
    common.add_argument("--seed", type=int, help="seed for folds, models and synthesis")
    common.add_argument("--jobs", type=int, help="worker processes for extraction")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="depcost", description=__doc__.split(":")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate the synthetic corpus")
    p.add_argument("--coupling", type=float, help="signal-label coupling in [0, 1]")
    p.add_argument("--subjects", type=int, help="number of subjects")
    p.add_argument("--noise-level", type=float, help="background noise relative to speech RMS")
    p.add_argument("--no-deep", action="store_true", help="skip deep-feature matrices")

    p = sub.add_parser("extract", parents=[common], help="extract a feature table")
    p.add_argument("--source", choices=("conventional", "deep"), help="feature source")

    p = sub.add_parser("enhance", parents=[common], help="write normalized, enhanced WAVs")
    p.add_argument("--significance", action="store_true",
                   help="also test every feature before/after enhancement (Wilcoxon, Bonferroni)")

    p = sub.add_parser("select", parents=[common], help="standardize and mRMR-select on all rows")
    p.add_argument("--source", choices=("conventional", "deep"), help="feature source")

    p = sub.add_parser("run", parents=[common], help="cross-validate the configured model families")
    p.add_argument("--source", choices=("conventional", "deep"), help="feature source")

    sub.add_parser("benchmark", parents=[common], help="stage timings and bytes per feature source")

    p = sub.add_parser("report", parents=[common], help="combine run directories into one report")
    p.add_argument("runs", nargs="+", help="run output directories (each holding report.json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "jobs": args.jobs, "out": args.out})
        handler = getattr(commands, f"cmd_{args.command}")
        partial = handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DepcostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_PARTIAL if partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
