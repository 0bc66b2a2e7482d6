"""
Shared fixtures: fixture-table builders and the 40-domain golden corpus.
"""

import json
from pathlib import Path
from typing import Dict, List, Tuple

import pytest

from app.core.utils import reverse_name
from app.services.backends import FixtureBackend, parse_fixture_entry, parse_fixture_key

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def ok(*records: str, ttl: int = 3600) -> dict:
    return {"status": "OK", "ttl": ttl, "records": list(records)}


def status(name: str) -> dict:
    return {"status": name, "ttl": 0, "records": []}


def ptr(address: str, target: str) -> Tuple[str, dict]:
    return f"{reverse_name(address)} PTR", ok(target)


def backend_from(entries: Dict[str, dict]) -> FixtureBackend:
    return FixtureBackend({parse_fixture_key(k): parse_fixture_entry(v) for k, v in entries.items()})


def golden_corpus() -> Tuple[List[str], Dict[str, dict]]:
    """
    40 domains with a known configuration mix.

    6 PlainV4Only, 3 PlainV6Only, 3 PlainDualStack, 5 RoundRobin,
    6 MxBalancing, 4 Hybrid, 3 NonIdentified, 4 NoMx, 3 NullMx, 3 errored.
    """
    domains: List[str] = []
    f: Dict[str, dict] = {}

    for i in range(6):
        d = f"p4-{i}.test"
        address = f"192.0.2.{10 + i}"
        domains.append(d)
        f[f"{d} MX"] = ok(f"10 mx.{d}.", ttl=300)
        f[f"{d} TXT"] = ok("v=spf1 include:_spf.test -all")
        f[f"mx.{d} A"] = ok(address)
        key, entry = ptr(address, f"mx.{d}.")
        f[key] = entry

    for i in range(3):
        d = f"p6-{i}.test"
        domains.append(d)
        f[f"{d} MX"] = ok(f"10 mx.{d}.")
        f[f"mx.{d} AAAA"] = ok(f"2001:db8::{i + 1}")

    for i in range(3):
        d = f"ds-{i}.test"
        domains.append(d)
        f[f"{d} MX"] = ok(f"10 mx.{d}.")
        f[f"mx.{d} A"] = ok(f"198.51.100.{i + 1}")
        f[f"mx.{d} AAAA"] = ok(f"2001:db8:1::{i + 1}")

    for i in range(5):
        d = f"rr-{i}.test"
        domains.append(d)
        second = "10.0.0.1" if i == 0 else f"203.0.113.{2 * i + 2}"
        f[f"{d} MX"] = ok(f"10 mx.{d}.")
        f[f"mx.{d} A"] = ok(f"203.0.113.{2 * i + 1}", second)

    for i in range(6):
        d = f"mb-{i}.test"
        domains.append(d)
        backup = 10 if i < 3 else 20
        f[f"{d} MX"] = ok(f"10 mx1.{d}.", f"{backup} mx2.{d}.")
        f[f"mx1.{d} A"] = ok(f"192.0.2.{100 + 2 * i}")
        f[f"mx2.{d} A"] = ok(f"192.0.2.{101 + 2 * i}")

    for i in range(4):
        d = f"hy-{i}.test"
        domains.append(d)
        primary = f"hy-{i}.mail.protection.outlook.com" if i < 2 else f"mx1.{d}"
        f[f"{d} MX"] = ok(f"10 {primary}.", f"20 mx2.{d}.")
        f[f"{primary} A"] = ok(f"198.18.{i}.1", f"198.18.{i}.2")
        f[f"mx2.{d} A"] = ok(f"198.18.{i}.3")

    for i in range(3):
        d = f"ni-{i}.test"
        domains.append(d)
        f[f"{d} MX"] = ok(f"10 mx.{d}.")

    for i in range(4):
        d = f"nomx-{i}.test"
        domains.append(d)
        f[f"{d} MX"] = status("NOERROR_EMPTY")

    for i in range(3):
        d = f"null-{i}.test"
        domains.append(d)
        f[f"{d} MX"] = ok("0 .")
        f[f"{d} TXT"] = ok("v=spf1 -all")

    f["err-0.test MX"] = status("SERVFAIL")
    f["err-1.test MX"] = status("TIMEOUT")
    domains.extend(["err-0.test", "err-1.test", "err-2.test"])  # err-2 is NXDOMAIN (unlisted)

    return domains, f


@pytest.fixture
def golden():
    return golden_corpus()


@pytest.fixture
def golden_files(tmp_path, golden):
    """Golden corpus written as a ranked domain list plus a fixture file."""
    domains, fixtures = golden
    fixture_path = tmp_path / "golden.json"
    fixture_path.write_text(json.dumps(fixtures, indent=2, sort_keys=True), encoding="utf-8")

    list_path = tmp_path / "top.csv"
    list_path.write_text(
        "".join(f"{rank},{d}\n" for rank, d in enumerate(domains, start=1)),
        encoding="utf-8",
    )
    return list_path, fixture_path


@pytest.fixture
def round_robin_fixtures():
    """One MX resolving to two A records."""
    return {
        "domain.tld MX": ok("10 mx.domain.tld."),
        "domain.tld TXT": ok("v=spf1 mx -all"),
        "mx.domain.tld A": ok("192.0.2.1", "192.0.2.2"),
        "mx.domain.tld AAAA": status("NOERROR_EMPTY"),
        "1.2.0.192.in-addr.arpa PTR": ok("mx.domain.tld."),
        "2.2.0.192.in-addr.arpa PTR": ok("other.domain.tld."),
    }


@pytest.fixture
def hybrid_fixtures():
    """Two MX: mx2 (preference 10) with two A records, mx1 (preference 20) with one."""
    return {
        "domain.tld MX": ok("20 mx1.domain.tld.", "10 mx2.domain.tld."),
        "mx1.domain.tld A": ok("192.0.2.1"),
        "mx2.domain.tld A": ok("192.0.2.2", "192.0.2.3"),
    }
