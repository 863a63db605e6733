import argparse
import logging
import sys

from vcselect.commands import diagnose, evaluate, fit, replicate_study, simulate
from vcselect.environment import configure_logging

# Logger for the CLI entry point
logger = logging.getLogger(__name__)

COMMANDS = [simulate, fit, evaluate, diagnose, replicate_study]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcselect",
        description="Bayesian quantile varying-coefficient regression with spike-and-slab group selection",
    )
    parser.add_argument("--log-level", help="overrides VCSELECT_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    logger.info(f"Running {args.command}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
