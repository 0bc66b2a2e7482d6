"""
Summarize command.

Recomputes summary.json and the histogram CSVs from an existing profiles.jsonl.
"""

import argparse
import logging

from app.core.config import settings
from app.core.exceptions import MxAuditError
from app.services.scanner import read_profiles, write_summary
from app.services.stats import summarize

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("summarize", help="Recompute the summary from profiles.jsonl")
    parser.add_argument("--profiles", required=True, help="profiles.jsonl written by a scan")
    parser.add_argument("--out", default=settings.output_dir, help="Output directory")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        profiles = read_profiles(args.profiles)
        summary = summarize(profiles)
        write_summary(args.out, summary)
    except (MxAuditError, ValueError, OSError) as e:
        logger.error(f"Cannot summarize {args.profiles}: {e}")
        return 1

    logger.info(f"Summarized {summary.k_q} profiles (k={summary.k})")
    return 0
