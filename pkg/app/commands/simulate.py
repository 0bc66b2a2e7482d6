"""
Simulate command.

Runs MTA selection trials over a pool and prints the TrialReport as JSON.
"""

import argparse
import logging
from pathlib import Path

from app.core.exceptions import MxAuditError
from app.core.utils import canonical_address
from app.schemas.simulation import ClientPolicy, ServerPolicy
from app.services.simulator import load_pool, run_trials

logger = logging.getLogger(__name__)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _address(text: str) -> str:
    try:
        return canonical_address(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an IP address: {text}") from None


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="Simulate exchanger selection over a pool")
    parser.add_argument("--pool", required=True, help="Pool JSON or resolver fixture file")
    parser.add_argument("--domain", help="Domain whose MX RRset defines the pool (fixture input only)")
    parser.add_argument("--trials", type=_positive, required=True)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--client", choices=[p.value for p in ClientPolicy], default=ClientPolicy.FIRST_ADDRESS.value)
    parser.add_argument("--server", choices=[p.value for p in ServerPolicy], default=ServerPolicy.ROTATE.value)
    parser.add_argument(
        "--unavailable",
        action="append",
        default=[],
        type=_address,
        metavar="ADDRESS",
        help="Mark an address as down (repeatable)",
    )
    parser.add_argument("--out", help="Also write the report to this file")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        pool = load_pool(args.pool, args.domain)
    except (MxAuditError, ValueError, OSError) as e:
        logger.error(f"Cannot load pool: {e}")
        return 1

    if args.unavailable:
        pool = pool.with_unavailable(args.unavailable)

    report = run_trials(
        pool,
        ClientPolicy(args.client),
        args.trials,
        args.seed,
        server_policy=ServerPolicy(args.server),
    )
    text = report.model_dump_json(indent=2)
    print(text)

    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0
