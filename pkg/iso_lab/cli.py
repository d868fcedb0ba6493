"""
iso-lab command line

    iso-lab run      --config PATH [--seed N] [--out DIR]
    iso-lab sweep    --config PATH [--seed N] [--out DIR] [--threads N]
    iso-lab validate --config PATH

Each command prints its JSON result and exits 0 on success, 1 for invalid
input, 2 for runtime failures and 3 for I/O errors.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from .config import settings
from .tools.experiment import ExperimentTools


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iso-lab",
        description="Prediction-routed optimistic Hedge experiments in latent-context games",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Configuration reference: docs/CONFIG_SCHEMA.md",
    )
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default from ISO_LAB_LOG_LEVEL)",
    )
    parser.add_argument("--project-root", default=None, help="Base directory for relative game paths")
    commands = parser.add_subparsers(dest="command", required=True, metavar="{run,sweep,validate}")

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", required=True, help="Run configuration YAML")
        sub.add_argument("--seed", type=int, default=None, help="Replace the configured seed list")

    run = commands.add_parser("run", help="Run a configuration once per seed")
    add_common(run)
    run.add_argument("--out", default=None, help="Output directory")

    sweep = commands.add_parser("sweep", help="Run every sweep cell")
    add_common(sweep)
    sweep.add_argument("--out", default=None, help="Output directory")
    sweep.add_argument("--threads", type=int, default=None, help="Worker processes for sweep cells")

    validate = commands.add_parser("validate", help="Check a configuration and its game")
    add_common(validate)

    oracle = commands.add_parser("oracle-check", help=argparse.SUPPRESS)
    add_common(oracle)
    oracle.add_argument("--resolution", type=float, default=0.05, help="Comparator grid spacing")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    tools = ExperimentTools(args.project_root)
    if args.command == "run":
        result = tools.run(args.config, seed=args.seed, out=args.out)
    elif args.command == "sweep":
        result = tools.sweep(args.config, seed=args.seed, out=args.out, threads=args.threads)
    elif args.command == "validate":
        result = tools.validate(args.config, seed=args.seed)
    else:
        result = tools.oracle_check(args.config, seed=args.seed, resolution=args.resolution)

    print(json.dumps(result, indent=2, default=str))
    return int(result["exit_code"])


if __name__ == "__main__":
    sys.exit(main())
