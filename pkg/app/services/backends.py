"""
DNS Query Backends

Pluggable sources of DNS answers for the resolver pipeline:

- ``FixtureBackend``: deterministic answers from JSON fixture files
- ``DnsPythonBackend``: live queries against one recursive resolver
- ``QueryMemo``: run-scoped memo guaranteeing one query per (name, rrtype)
- ``RecordingBackend``: wrapper logging every query that reaches a backend

Author: Development Team
Version: 1.0.0
"""

import asyncio
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Tuple, Union, runtime_checkable

import dns.asyncresolver
import dns.exception
import dns.resolver
from prometheus_client import CollectorRegistry, Counter
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import BackendUnavailable, FixtureParseError
from app.core.utils import canonicalize
from app.schemas.profile import QueryStatus

logger = logging.getLogger(__name__)


class RRType(str, Enum):
    """Record types the pipeline queries."""

    MX = "MX"
    A = "A"
    AAAA = "AAAA"
    TXT = "TXT"
    PTR = "PTR"


class QueryResult(BaseModel):
    """Answer to one (name, rrtype) query."""

    status: QueryStatus
    records: Tuple[Tuple[str, int], ...] = Field(default_factory=tuple, description="(rdata, ttl) pairs")
    is_cname: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _records_iff_ok(self) -> "QueryResult":
        if bool(self.records) != (self.status == QueryStatus.OK):
            raise ValueError("records must be non-empty exactly when status is Ok")
        return self

    @property
    def rdata(self) -> List[str]:
        return [text for text, _ in self.records]


@runtime_checkable
class QueryBackend(Protocol):
    """Anything that answers DNS queries; must tolerate concurrent calls."""

    async def query(self, name: str, rrtype: RRType) -> QueryResult:
        ...


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

FIXTURE_STATUSES: Dict[str, QueryStatus] = {
    "OK": QueryStatus.OK,
    "NXDOMAIN": QueryStatus.NXDOMAIN,
    "NOERROR_EMPTY": QueryStatus.NO_RECORDS,
    "TIMEOUT": QueryStatus.TIMEOUT,
    "SERVFAIL": QueryStatus.SERVFAIL,
}


class FixtureBackend:
    """
    Deterministic backend answering exactly from a fixture table.

    Unlisted (name, rrtype) pairs answer NXDOMAIN.

    Example:
        >>> backend = FixtureBackend({("example.org", RRType.MX): QueryResult(...)})
        >>> await backend.query("example.org", RRType.MX)
    """

    def __init__(self, table: Dict[Tuple[str, RRType], QueryResult]):
        self._table = dict(table)
        logger.info(f"FixtureBackend initialized with {len(self._table)} entries")

    def __len__(self) -> int:
        return len(self._table)

    async def query(self, name: str, rrtype: RRType) -> QueryResult:
        result = self._table.get((name, rrtype))
        if result is None:
            return QueryResult(status=QueryStatus.NXDOMAIN)
        return result

    def answer(self, name: str, rrtype: RRType) -> QueryResult:
        """Synchronous lookup, used when building simulator pools from fixtures."""
        return self._table.get((name, rrtype), QueryResult(status=QueryStatus.NXDOMAIN))


def _line_of(text: str, key: str) -> int:
    """1-based line where a JSON key first appears (1 if not found)."""
    pos = text.find(json.dumps(key))
    return text.count("\n", 0, pos) + 1 if pos >= 0 else 1


def parse_fixture_key(key: str) -> Tuple[str, RRType]:
    """Split a fixture key "name TYPE" into its canonical parts."""
    name, _, rrtype = key.strip().rpartition(" ")
    if not name:
        raise ValueError(f"key '{key}' is not of the form 'name TYPE'")
    try:
        return canonicalize(name), RRType(rrtype.upper())
    except ValueError as e:
        raise ValueError(f"key '{key}': {e}") from e


def parse_fixture_entry(entry: object) -> QueryResult:
    """Convert one fixture object into a QueryResult."""
    if not isinstance(entry, dict):
        raise ValueError("entry must be an object")

    status_text = str(entry.get("status", "")).upper()
    if status_text not in FIXTURE_STATUSES:
        raise ValueError(f"unknown status '{entry.get('status')}'")

    ttl = entry.get("ttl", 0)
    if not isinstance(ttl, int) or ttl < 0:
        raise ValueError("ttl must be a non-negative integer")

    records = entry.get("records", [])
    if not isinstance(records, list) or not all(isinstance(r, str) for r in records):
        raise ValueError("records must be a list of strings")

    return QueryResult(
        status=FIXTURE_STATUSES[status_text],
        records=tuple((r, ttl) for r in records),
        is_cname=bool(entry.get("is_cname", False)),
    )


def _load_fixture_file(path: Path) -> Dict[Tuple[str, RRType], QueryResult]:
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureParseError(path, e.lineno, e.msg) from e

    if not isinstance(data, dict):
        raise FixtureParseError(path, 1, "top level must be an object keyed 'name TYPE'")

    table: Dict[Tuple[str, RRType], QueryResult] = {}
    for key, entry in data.items():
        try:
            table[parse_fixture_key(key)] = parse_fixture_entry(entry)
        except ValueError as e:
            raise FixtureParseError(path, _line_of(text, key), str(e)) from e
    return table


def load_fixture_backend(path: Union[str, Path]) -> FixtureBackend:
    """
    Load a fixture backend from one JSON file or a directory of JSON files.

    Files in a directory are merged in name order; later files win.

    Raises:
        FixtureParseError: with the file and line of the offending entry
    """
    root = Path(path)
    if root.is_dir():
        files = sorted(root.glob("*.json"))
    elif root.exists():
        files = [root]
    else:
        raise FixtureParseError(root, 0, "fixture path does not exist")

    if not files:
        raise FixtureParseError(root, 0, "no fixture files found")

    table: Dict[Tuple[str, RRType], QueryResult] = {}
    for file in files:
        table.update(_load_fixture_file(file))
        logger.debug(f"Loaded fixtures from {file}")

    return FixtureBackend(table)


# ---------------------------------------------------------------------------
# Live resolution
# ---------------------------------------------------------------------------

def _rdata_text(rrtype: RRType, rdata: object) -> str:
    if rrtype == RRType.MX:
        return f"{rdata.preference} {rdata.exchange.to_text()}"  # type: ignore[attr-defined]
    if rrtype in (RRType.A, RRType.AAAA):
        return str(rdata.address)  # type: ignore[attr-defined]
    if rrtype == RRType.TXT:
        return b"".join(rdata.strings).decode("utf-8", errors="replace")  # type: ignore[attr-defined]
    return rdata.target.to_text()  # type: ignore[attr-defined]


class DnsPythonBackend:
    """
    Live backend querying a single recursive resolver through dnspython.

    The resolver's own cache is disabled so every query reaches the upstream.
    """

    def __init__(self, nameserver: str, timeout_ms: int = 5000):
        self.nameserver = nameserver
        self._resolver = dns.asyncresolver.Resolver(configure=False)
        self._resolver.nameservers = [nameserver]
        self._resolver.timeout = timeout_ms / 1000
        self._resolver.lifetime = timeout_ms / 1000
        self._resolver.cache = None

        logger.info(f"DnsPythonBackend using {nameserver} (timeout {timeout_ms} ms)")

    async def query(self, name: str, rrtype: RRType) -> QueryResult:
        try:
            answer = await self._resolver.resolve(
                name + ".", rrtype.value, raise_on_no_answer=False, search=False
            )
        except dns.resolver.NXDOMAIN:
            return QueryResult(status=QueryStatus.NXDOMAIN)
        except dns.resolver.NoAnswer:
            return QueryResult(status=QueryStatus.NO_RECORDS)
        except dns.exception.Timeout:
            return QueryResult(status=QueryStatus.TIMEOUT)
        except dns.resolver.NoNameservers as e:
            errors = e.kwargs.get("errors") or []
            if errors and all(isinstance(err[3], OSError) for err in errors):
                raise BackendUnavailable(f"Resolver {self.nameserver} unreachable: {errors[0][3]}") from e
            return QueryResult(status=QueryStatus.SERVFAIL)
        except OSError as e:
            raise BackendUnavailable(f"Resolver {self.nameserver} unreachable: {e}") from e
        except dns.exception.DNSException as e:
            logger.debug(f"{name} {rrtype.value}: {e}")
            return QueryResult(status=QueryStatus.SERVFAIL)

        if answer.rrset is None or len(answer.rrset) == 0:
            return QueryResult(status=QueryStatus.NO_RECORDS)

        ttl = answer.rrset.ttl
        return QueryResult(
            status=QueryStatus.OK,
            records=tuple((_rdata_text(rrtype, rd), ttl) for rd in answer.rrset),
            is_cname=answer.canonical_name != answer.qname,
        )


# ---------------------------------------------------------------------------
# Wrappers
# ---------------------------------------------------------------------------

class QueryMemo:
    """
    Run-scoped memo in front of a backend.

    The first caller for a (name, rrtype) starts the backend query; every
    later caller awaits the same task, so at most one query per key reaches
    the backend (retries on timeout excepted).
    """

    def __init__(self, backend: QueryBackend, retries: int = 0):
        self.backend = backend
        self.retries = retries
        self._inflight: Dict[Tuple[str, RRType], "asyncio.Task[QueryResult]"] = {}

        self.registry = CollectorRegistry()
        self._issued = Counter(
            "mx_audit_queries_issued", "Queries sent to the backend", ["rrtype"], registry=self.registry
        )
        self._hits = Counter(
            "mx_audit_memo_hits", "Queries answered from the memo", ["rrtype"], registry=self.registry
        )
        self._answers = Counter(
            "mx_audit_answers", "Backend answers by status", ["status"], registry=self.registry
        )

    async def query(self, name: str, rrtype: RRType) -> QueryResult:
        key = (name, rrtype)
        task = self._inflight.get(key)
        if task is None:
            task = asyncio.ensure_future(self._issue(name, rrtype))
            self._inflight[key] = task
        else:
            self._hits.labels(rrtype.value).inc()
            logger.debug(f"memo hit: {name} {rrtype.value}")
        return await asyncio.shield(task)

    async def _issue(self, name: str, rrtype: RRType) -> QueryResult:
        result = QueryResult(status=QueryStatus.TIMEOUT)
        for attempt in range(self.retries + 1):
            self._issued.labels(rrtype.value).inc()
            result = await self.backend.query(name, rrtype)
            self._answers.labels(result.status.value).inc()
            if result.status != QueryStatus.TIMEOUT:
                break
            logger.debug(f"timeout {name} {rrtype.value} (attempt {attempt + 1})")
        return result

    def snapshot(self) -> Dict[str, int]:
        """Counter values keyed 'metric:label', sorted for stable output."""
        values: Dict[str, int] = {}
        for metric in self.registry.collect():
            for sample in metric.samples:
                if not sample.name.endswith("_total"):
                    continue
                label = next(iter(sample.labels.values()), "")
                values[f"{metric.name}:{label}"] = int(sample.value)
        return dict(sorted(values.items()))


class RecordingBackend:
    """Wrapper recording every (name, rrtype) that reaches the inner backend."""

    def __init__(self, backend: QueryBackend):
        self.backend = backend
        self.calls: List[Tuple[str, RRType]] = []

    async def query(self, name: str, rrtype: RRType) -> QueryResult:
        self.calls.append((name, rrtype))
        logger.debug(f"query {name} {rrtype.value}")
        return await self.backend.query(name, rrtype)


def open_backend(
    fixture_dir: Optional[str] = None,
    resolver_address: Optional[str] = None,
    timeout_ms: int = 5000,
) -> QueryBackend:
    """Build the backend selected by a run configuration."""
    if fixture_dir is not None:
        return load_fixture_backend(fixture_dir)
    if resolver_address is None:
        raise ValueError("either fixture_dir or resolver_address is required")
    return DnsPythonBackend(resolver_address, timeout_ms)
