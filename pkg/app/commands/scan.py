"""
Scan command.

Resolves, audits and summarizes a domain corpus against a live resolver or
a fixture directory.
"""

import argparse
import logging

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.schemas.run import InputFormat, RunConfig
from app.services import scanner

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("scan", help="Resolve and audit a domain corpus")
    parser.add_argument("--input", dest="inputs", nargs="+", required=True, metavar="FILE", help="Domain list files")
    parser.add_argument(
        "--format",
        choices=[f.value for f in InputFormat],
        default=InputFormat.PLAIN.value,
        help="Input format (default: plain)",
    )

    backend = parser.add_mutually_exclusive_group()
    backend.add_argument("--resolver", help=f"Recursive resolver address (default: {settings.resolver})")
    backend.add_argument("--fixtures", help="Fixture file or directory replacing live DNS")

    parser.add_argument("--concurrency", type=int, default=settings.concurrency)
    parser.add_argument("--timeout-ms", type=int, default=settings.timeout_ms)
    parser.add_argument("--retries", type=int, default=settings.retries)
    parser.add_argument("--out", default=settings.output_dir, help="Output directory")
    parser.add_argument("--hosting-rules", default=settings.hosting_rules_path, help="Hosting rules JSON")
    parser.add_argument("--trace-queries", action="store_true", help="Write every backend query to queries.txt")
    parser.set_defaults(handler=handle)


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Turn parsed arguments into a RunConfig.

    MX_AUDIT_RESOLVER takes precedence over --resolver; --fixtures disables
    live resolution altogether.

    Raises:
        ConfigError: if the combination of options does not validate
    """
    resolver = None
    if args.fixtures is None:
        if "resolver" in settings.model_fields_set:
            if args.resolver and args.resolver != settings.resolver:
                logger.info(f"MX_AUDIT_RESOLVER={settings.resolver} overrides --resolver {args.resolver}")
            resolver = settings.resolver
        else:
            resolver = args.resolver or settings.resolver

    try:
        return RunConfig(
            input_paths=args.inputs,
            input_format=InputFormat(args.format),
            resolver_address=resolver,
            fixture_dir=args.fixtures,
            concurrency=args.concurrency,
            timeout_ms=args.timeout_ms,
            retries=args.retries,
            output_dir=args.out,
            hosting_rules_path=args.hosting_rules,
            error_exit_threshold=settings.error_exit_threshold,
            trace_queries=args.trace_queries,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid scan options: {e.errors()[0]['msg']}") from e


def handle(args: argparse.Namespace) -> int:
    try:
        config = build_config(args)
    except ConfigError as e:
        logger.error(str(e))
        return scanner.EXIT_FATAL

    mode = f"fixtures {config.fixture_dir}" if config.fixture_dir else f"resolver {config.resolver_address}"
    logger.info(f"Scanning {len(config.input_paths)} input files via {mode}")
    return scanner.run(config)
