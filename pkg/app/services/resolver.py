"""
Resolver Pipeline Module

Resolves the email-delivery records of a domain in three steps:
1. MX and TXT records of the domain
2. A and AAAA records of every distinct exchanger
3. PTR records of every address obtained in step 2

All queries go through a run-scoped ``QueryMemo`` so that no (name, rrtype)
pair is queried twice within a run.

Author: Development Team
Version: 1.0.0
"""

import asyncio
import logging
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import BackendUnavailable, MalformedName
from app.core.utils import canonical_address, canonicalize, reverse_name
from app.schemas.profile import (
    DomainProfile,
    MxRecord,
    MxRecordSet,
    PtrOutcome,
    PtrStatus,
    QueryStatus,
    ResolvedExchanger,
)
from app.services.backends import QueryBackend, QueryMemo, QueryResult, RRType
from app.services.classifier import is_null_mx

logger = logging.getLogger(__name__)

MX_FAILURES = (QueryStatus.NXDOMAIN, QueryStatus.TIMEOUT, QueryStatus.SERVFAIL)

Rank = Union[int, float]


class ResolverPolicy(BaseModel):
    """Timeout, retry and concurrency policy; retries=0 is a single pass."""

    timeout_ms: int = Field(5000, gt=0)
    retries: int = Field(0, ge=0)
    max_concurrency: int = Field(64, gt=0)
    strict_timeouts: bool = Field(False, description="Mark a profile errored on any step-2 timeout")

    model_config = ConfigDict(frozen=True)


def parse_mx_rdata(text: str, ttl: int) -> MxRecord:
    """
    Parse "preference exchanger" MX rdata.

    Raises:
        ValueError: if the rdata is not two fields or the preference is not an integer
    """
    parts = text.split()
    if len(parts) != 2:
        raise ValueError(f"MX rdata '{text}' is not 'preference exchanger'")
    return MxRecord(preference=int(parts[0]), exchanger=parts[1], ttl=ttl)


def _addresses(result: QueryResult, version: int, owner: str) -> Tuple[str, ...]:
    """Canonical addresses of one family from an A or AAAA answer."""
    if result.status != QueryStatus.OK:
        return ()
    addresses: List[str] = []
    for text in result.rdata:
        try:
            address = canonical_address(text)
        except ValueError:
            logger.warning(f"{owner}: ignoring invalid address '{text}'")
            continue
        if (":" in address) != (version == 6):
            logger.warning(f"{owner}: ignoring IPv{6 if version == 4 else 4} address {address} in IPv{version} answer")
            continue
        addresses.append(address)
    return tuple(addresses)


async def ptr_lookup(address: str, backend: QueryBackend, owner: Optional[str] = None) -> PtrOutcome:
    """
    Reverse-resolve an address and check it against its owning exchanger.

    Args:
        address: IPv4 or IPv6 address
        backend: Query backend (or memo)
        owner: Exchanger the address was obtained from

    Returns:
        PtrOutcome; Found with forward_confirmed when a PTR name equals the
        owner after canonicalization, NotFound for NXDOMAIN or empty answers,
        Error otherwise
    """
    result = await backend.query(reverse_name(address), RRType.PTR)

    if result.status in (QueryStatus.NXDOMAIN, QueryStatus.NO_RECORDS):
        return PtrOutcome(status=PtrStatus.NOT_FOUND)
    if result.status != QueryStatus.OK:
        return PtrOutcome(status=PtrStatus.ERROR)

    names: List[str] = []
    for text in result.rdata:
        try:
            names.append(canonicalize(text))
        except MalformedName:
            logger.warning(f"PTR of {address}: ignoring malformed name '{text}'")

    confirmed = owner is not None and canonicalize(owner) in names
    return PtrOutcome(status=PtrStatus.FOUND, names=tuple(names), forward_confirmed=confirmed)


async def _resolve_exchanger(name: str, memo: QueryMemo) -> ResolvedExchanger:
    a_result, aaaa_result = await asyncio.gather(
        memo.query(name, RRType.A),
        memo.query(name, RRType.AAAA),
    )
    ipv4 = _addresses(a_result, 4, name)
    ipv6 = _addresses(aaaa_result, 6, name)

    # Step 3
    unique = list(dict.fromkeys(ipv4 + ipv6))
    outcomes = await asyncio.gather(*(ptr_lookup(a, memo, name) for a in unique))

    return ResolvedExchanger(
        exchanger=name,
        ipv4=ipv4,
        ipv6=ipv6,
        ptr=dict(zip(unique, outcomes)),
        a_status=a_result.status,
        aaaa_status=aaaa_result.status,
        is_cname_target=a_result.is_cname or aaaa_result.is_cname,
    )


async def resolve_domain(
    domain: str,
    backend: QueryBackend,
    policy: Optional[ResolverPolicy] = None,
    median_rank: Optional[Rank] = None,
) -> DomainProfile:
    """
    Resolve one domain through the three-step pipeline.

    The returned profile is not classified yet. Per-record failures are kept
    as statuses; a failed MX query marks the profile errored.

    Args:
        domain: Canonical domain name
        backend: Query backend; wrapped in a fresh QueryMemo unless it is one
        policy: Resolver policy (defaults apply when omitted)
        median_rank: Popularity rank carried into the profile

    Raises:
        BackendUnavailable: when the transport is completely down
    """
    policy = policy or ResolverPolicy()
    memo = backend if isinstance(backend, QueryMemo) else QueryMemo(backend, policy.retries)

    # Step 1
    mx_result, txt_result = await asyncio.gather(
        memo.query(domain, RRType.MX),
        memo.query(domain, RRType.TXT),
    )
    base = dict(
        domain=domain,
        median_rank=median_rank,
        mx_status=mx_result.status,
        txt_status=txt_result.status,
        txt=tuple(txt_result.rdata) if txt_result.status == QueryStatus.OK else (),
    )

    if mx_result.status in MX_FAILURES:
        logger.debug(f"{domain}: MX query failed ({mx_result.status.value})")
        return DomainProfile(**base, errored=True, error=f"MX query {mx_result.status.value}")

    if mx_result.status == QueryStatus.NO_RECORDS:
        return DomainProfile(**base)

    try:
        mx = MxRecordSet(records=tuple(parse_mx_rdata(text, ttl) for text, ttl in mx_result.records))
    except ValueError as e:
        logger.warning(f"{domain}: unparseable MX answer: {e}")
        return DomainProfile(**base, errored=True, error=f"unparseable MX answer: {e}")

    if is_null_mx(mx):
        return DomainProfile(**base, mx=mx)

    # Step 2 (and 3 per exchanger)
    names = mx.distinct_exchangers()
    exchangers = await asyncio.gather(*(_resolve_exchanger(n, memo) for n in names))

    timed_out = [
        e.exchanger for e in exchangers
        if QueryStatus.TIMEOUT in (e.a_status, e.aaaa_status)
    ]
    if policy.strict_timeouts and timed_out:
        logger.debug(f"{domain}: address queries timed out for {timed_out}")
        return DomainProfile(
            **base, mx=mx, exchangers=tuple(exchangers),
            errored=True, error=f"address query Timeout: {', '.join(timed_out)}",
        )

    return DomainProfile(**base, mx=mx, exchangers=tuple(exchangers))


def _errored(domain: str, rank: Optional[Rank], reason: str) -> DomainProfile:
    return DomainProfile(domain=domain, median_rank=rank, errored=True, error=reason)


async def resolve_many(
    domains: Sequence[Tuple[str, Optional[Rank]]],
    backend: QueryBackend,
    policy: Optional[ResolverPolicy] = None,
) -> List[DomainProfile]:
    """
    Resolve a corpus with at most ``policy.max_concurrency`` domains in flight.

    One QueryMemo is shared by the whole corpus. Unexpected per-domain
    exceptions become errored profiles; BackendUnavailable aborts the run.

    Returns:
        Profiles sorted by domain name
    """
    policy = policy or ResolverPolicy()
    memo = backend if isinstance(backend, QueryMemo) else QueryMemo(backend, policy.retries)
    semaphore = asyncio.Semaphore(policy.max_concurrency)

    async def one(domain: str, rank: Optional[Rank]) -> DomainProfile:
        async with semaphore:
            try:
                return await resolve_domain(domain, memo, policy, rank)
            except BackendUnavailable:
                raise
            except Exception as e:
                logger.warning(f"{domain}: resolution failed: {e}", exc_info=True)
                return _errored(domain, rank, f"resolution failed: {e}")

    logger.info(f"Resolving {len(domains)} domains (concurrency {policy.max_concurrency})")
    profiles = await asyncio.gather(*(one(d, r) for d, r in domains))
    return sorted(profiles, key=lambda p: p.domain)
