"""
Scan Orchestration Module

Drives a measurement run end to end:

1. Ingest domain lists (plain or "rank,domain"), merging ranks by median
2. Resolve every domain through a shared query memo
3. Audit and summarize the profiles
4. Write profiles.jsonl, summary.json, the histogram CSVs and run_meta.json

Author: Development Team
Version: 1.0.0
"""

import asyncio
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from app.core.exceptions import EmptyCorpus, MalformedName, MxAuditError, ParseError
from app.core.utils import canonicalize
from app.schemas.profile import DomainProfile
from app.schemas.run import InputFormat, RunConfig, RunMeta
from app.schemas.summary import CorpusSummary
from app.services.backends import QueryBackend, QueryMemo, RecordingBackend, open_backend
from app.services.classifier import audit, load_hosting_rules
from app.services.resolver import Rank, ResolverPolicy, resolve_many
from app.services.stats import median_rank, summarize, write_histogram_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_TOO_MANY_ERRORS = 2

PROFILES_FILE = "profiles.jsonl"
SUMMARY_FILE = "summary.json"
RUN_META_FILE = "run_meta.json"
QUERY_TRACE_FILE = "queries.txt"

HISTOGRAM_FILES = {
    "hist_mx.csv": "mx_count_hist",
    "hist_a.csv": "a_count_hist",
    "hist_aaaa.csv": "aaaa_count_hist",
    "hist_ttl.csv": "ttl_hist",
    "hist_pref_stddev.csv": "pref_stddev_hist",
}

_CSV_HEADER = "rank,domain"


def _parse_line(line: str, input_format: InputFormat, path: str, lineno: int) -> Tuple[str, Optional[int]]:
    if input_format == InputFormat.PLAIN:
        name, rank = line, None
    else:
        rank_text, sep, name = line.partition(",")
        if not sep:
            raise ParseError(path, lineno, f"expected 'rank,domain', got '{line}'")
        try:
            rank = int(rank_text.strip())
        except ValueError:
            raise ParseError(path, lineno, f"rank '{rank_text}' is not an integer") from None
        if rank < 1:
            raise ParseError(path, lineno, f"rank must be positive, got {rank}")

    try:
        return canonicalize(name), rank
    except MalformedName as e:
        raise ParseError(path, lineno, str(e)) from e


def ingest(
    paths: Sequence[Union[str, Path]],
    input_format: InputFormat = InputFormat.PLAIN,
) -> List[Tuple[str, Optional[Rank]]]:
    """
    Read domain lists into the unique canonical domains with their median rank.

    Blank lines and lines starting with '#' are skipped, as is a "rank,domain"
    header ahead of the first entry. A domain repeated within one file keeps its first
    rank; across files its ranks are combined by median.

    Args:
        paths: Input files
        input_format: plain (one domain per line) or ranked_csv

    Returns:
        (domain, median rank or None) pairs sorted by domain

    Raises:
        ParseError: with file and line of the first bad entry
    """
    ranks: Dict[str, List[int]] = {}

    for path in paths:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ParseError(path, 0, f"cannot read input: {e}") from e

        seen: Dict[str, Optional[int]] = {}
        first_entry = True
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            header = first_entry and input_format == InputFormat.RANKED_CSV and line.lower() == _CSV_HEADER
            first_entry = False
            if header:
                continue

            domain, rank = _parse_line(line, input_format, str(path), lineno)
            seen.setdefault(domain, rank)

        for domain, rank in seen.items():
            bucket = ranks.setdefault(domain, [])
            if rank is not None:
                bucket.append(rank)

        logger.info(f"Ingested {len(seen)} domains from {path}")

    logger.info(f"{len(ranks)} unique domains across {len(paths)} files")
    return [(d, median_rank(r) if r else None) for d, r in sorted(ranks.items())]


def write_outputs(output_dir: Union[str, Path], profiles: Iterable[DomainProfile], summary: CorpusSummary) -> None:
    """Write profiles.jsonl (sorted by domain), summary.json and the histogram CSVs."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / PROFILES_FILE, "w", encoding="utf-8", newline="\n") as f:
        for profile in sorted(profiles, key=lambda p: p.domain):
            f.write(profile.model_dump_json() + "\n")

    write_summary(out, summary)


def write_summary(output_dir: Union[str, Path], summary: CorpusSummary) -> None:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    text = json.dumps(summary.model_dump(mode="json"), indent=2, sort_keys=True)
    (out / SUMMARY_FILE).write_text(text + "\n", encoding="utf-8")

    for filename, field in HISTOGRAM_FILES.items():
        write_histogram_csv(getattr(summary, field), out / filename)

    logger.info(f"Summary and histograms written to {out}")


def read_profiles(path: Union[str, Path]) -> List[DomainProfile]:
    """
    Read a profiles.jsonl file back into profiles.

    Raises:
        ParseError: for unreadable files or lines that do not validate
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(path, 0, f"cannot read profiles: {e}") from e

    profiles: List[DomainProfile] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            profiles.append(DomainProfile.model_validate_json(line))
        except ValidationError as e:
            raise ParseError(path, lineno, e.errors()[0]["msg"]) from e
    return profiles


def _error_share(profiles: Sequence[DomainProfile]) -> float:
    return sum(1 for p in profiles if p.errored) / len(profiles) if profiles else 0.0


def run(config: RunConfig, backend: Optional[QueryBackend] = None) -> int:
    """
    Execute one scan.

    Per-domain failures never abort the run; they are recorded as errored
    profiles. Live runs treat any address-query timeout as a domain error.

    Args:
        config: Validated run configuration
        backend: Backend to use instead of the one named in ``config``

    Returns:
        0 on success, 1 on a fatal input, configuration or transport error,
        2 when more than ``error_exit_threshold`` of the domains errored
    """
    timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    try:
        domains = ingest(config.input_paths, config.input_format)
        if not domains:
            raise EmptyCorpus("input contains no domains")

        rules = load_hosting_rules(config.hosting_rules_path)
        if backend is None:
            backend = open_backend(config.fixture_dir, config.resolver_address, config.timeout_ms)
        recorder = RecordingBackend(backend) if config.trace_queries else None

        policy = ResolverPolicy(
            timeout_ms=config.timeout_ms,
            retries=config.retries,
            max_concurrency=config.concurrency,
            strict_timeouts=config.live,
        )
        memo = QueryMemo(recorder or backend, config.retries)
        profiles = asyncio.run(resolve_many(domains, memo, policy))

        audited = [audit(p, rules) for p in profiles]
        summary = summarize(audited)
    except MxAuditError as e:
        logger.error(f"Scan aborted: {e}")
        return EXIT_FATAL
    except OSError as e:
        logger.error(f"Scan aborted by I/O error: {e}")
        return EXIT_FATAL

    share = _error_share(audited)
    exit_code = EXIT_TOO_MANY_ERRORS if share > config.error_exit_threshold else EXIT_OK
    if exit_code:
        logger.error(f"{share:.1%} of domains errored (threshold {config.error_exit_threshold:.0%})")

    meta = RunMeta(
        timestamp=timestamp,
        config=config,
        k_q=summary.k_q,
        k_w=summary.k_w,
        k_nomx=summary.k_nomx,
        k_errored=summary.k_errored,
        k_nullmx=summary.k_nullmx,
        k=summary.k,
        error_count=summary.k_errored,
        queries=memo.snapshot(),
        exit_code=exit_code,
    )

    try:
        write_outputs(config.output_dir, audited, summary)
        (Path(config.output_dir) / RUN_META_FILE).write_text(meta.model_dump_json(indent=2) + "\n", encoding="utf-8")
        if recorder is not None:
            lines = sorted(f"{name} {rrtype.value}" for name, rrtype in recorder.calls)
            (Path(config.output_dir) / QUERY_TRACE_FILE).write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot write outputs to {config.output_dir}: {e}")
        return EXIT_FATAL

    logger.info(
        f"Scan complete: k_q={summary.k_q}, k={summary.k}, "
        f"errored={summary.k_errored}, no MX={summary.k_nomx}, Null MX={summary.k_nullmx}"
    )
    return exit_code
