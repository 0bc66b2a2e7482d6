"""
mx-audit - Main Entry Point

Command-line tool measuring mail-exchanger load-balancing and fail-over
configurations of a domain corpus from DNS.

Subcommands:
    scan       resolve, audit and summarize a corpus
    classify   print the configuration label for record counts
    simulate   simulate MTA exchanger selection over a pool
    summarize  recompute the summary from an existing profiles.jsonl

Author: Development Team
Version: 1.0.0
"""

import argparse
import logging
import sys
from typing import List, Optional

from app.commands import classify, scan, simulate, summarize
from app.core.config import settings

logger = logging.getLogger(__name__)

COMMANDS = (scan, classify, simulate, summarize)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=settings.log_format,
        stream=sys.stderr,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mx-audit",
        description="Measure MX load-balancing and fail-over configurations from DNS",
    )
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help=f"Logging level (default: {settings.log_level})",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 1
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
