"""
Classify command.

Prints the configuration label for given record counts, for scripting.
"""

import argparse

from app.services.classifier import classify


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"count must be non-negative, got {value}")
    return value


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("classify", help="Print the configuration label for record counts")
    parser.add_argument("--nm", type=_count, required=True, help="Number of MX records")
    parser.add_argument("--na", type=_count, required=True, help="Number of IPv4 addresses")
    parser.add_argument("--naaaa", type=_count, required=True, help="Number of IPv6 addresses")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    print(classify(args.nm, args.na, args.naaaa).value)
    return 0
