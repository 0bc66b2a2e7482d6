"""
Configuration Classifier Module

Labels a resolved domain with its load-balancing / fail-over configuration
and sets the misconfiguration flags:

- Null-MX screening
- Configuration taxonomy (plain, round-robin, MX-balancing, hybrid)
- Hosting detection by exchanger suffix
- SPF detection in TXT records
- Private/local addresses, missing PTRs, duplicates, CNAME exchangers

Every function here is pure and safe to call from any number of workers.

Author: Development Team
Version: 1.0.0
"""

import ipaddress
import json
import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from pydantic import ValidationError

from app.core.exceptions import ParseError
from app.core.utils import ROOT, is_strict_hostname, matches_suffix
from app.schemas.profile import (
    AuditFlags,
    Classification,
    DomainProfile,
    HostingRule,
    MxRecordSet,
    PtrStatus,
    ResolvedExchanger,
    derive_counts,
)

logger = logging.getLogger(__name__)

DEFAULT_HOSTING_RULES: Tuple[HostingRule, ...] = (
    HostingRule(provider="Microsoft", suffixes=("outlook.com",)),
    HostingRule(provider="Google", suffixes=("google.com", "googlemail.com")),
)

PRIVATE_OR_LOCAL_NETWORKS = tuple(
    ipaddress.ip_network(n)
    for n in (
        "10.0.0.0/8",
        "172.16.0.0/12",
        "192.168.0.0/16",
        "127.0.0.0/8",
        "fc00::/7",
        "::1/128",
    )
)

_SPF_DENY_ALL = "v=spf1 -all"
_WHITESPACE_RE = re.compile(r'\s+')


def is_null_mx(mx: MxRecordSet) -> bool:
    """True iff the RRset is exactly one record "0 ." (the domain accepts no mail)."""
    if mx.n_m != 1:
        return False
    record = mx.records[0]
    return record.preference == 0 and record.exchanger == ROOT


def classify(n_m: int, n_a: int, n_abar: int, resolution_ok: bool = True) -> Classification:
    """
    Map record counts to a configuration label.

    Rules are applied in order so that the labels are disjoint: the plain
    definitions before round-robin, MX-balancing before hybrid. Anything left
    over (notably MX records without a single resolvable address) is
    NonIdentified.

    Args:
        n_m: Number of MX records
        n_a: Number of IPv4 addresses across exchangers
        n_abar: Number of IPv6 addresses across exchangers
        resolution_ok: False when address resolution was unusable

    Returns:
        Classification label (total over all non-negative inputs)

    Example:
        >>> classify(1, 2, 0)
        <Classification.ROUND_ROBIN: 'RoundRobin'>
        >>> classify(2, 3, 0)
        <Classification.HYBRID: 'Hybrid'>
    """
    if n_m == 0:
        return Classification.NO_MX
    if not resolution_ok or n_a + n_abar == 0:
        return Classification.NON_IDENTIFIED

    if n_m == 1:
        if n_a == 1 and n_abar == 0:
            return Classification.PLAIN_V4_ONLY
        if n_a == 0 and n_abar == 1:
            return Classification.PLAIN_V6_ONLY
        if n_a == 1 and n_abar == 1:
            return Classification.PLAIN_DUAL_STACK
        if n_a > 1 or n_abar > 1:
            return Classification.ROUND_ROBIN
        return Classification.NON_IDENTIFIED

    if n_a == n_m or n_abar == n_m:
        return Classification.MX_BALANCING
    return Classification.HYBRID


def detect_spf(txt: Iterable[str]) -> Tuple[bool, bool, bool]:
    """
    Check TXT records for SPF.

    Returns:
        (has_spf, deny_all, strict) where has_spf is a case-insensitive
        "v=spf" substring match, deny_all an exact "v=spf1 -all" after
        whitespace normalization, and strict a "v=spf1" prefix match
    """
    has_spf = deny_all = strict = False
    for record in txt:
        lowered = record.lower()
        normalized = _WHITESPACE_RE.sub(" ", lowered).strip()
        has_spf = has_spf or "v=spf" in lowered
        deny_all = deny_all or normalized == _SPF_DENY_ALL
        strict = strict or normalized == "v=spf1" or normalized.startswith("v=spf1 ")
    return has_spf, deny_all, strict


def detect_hosting(mx: MxRecordSet, rules: Sequence[HostingRule] = DEFAULT_HOSTING_RULES) -> Set[str]:
    """Providers for which at least one exchanger matches a suffix on label boundaries."""
    providers: Set[str] = set()
    for exchanger in mx.exchangers:
        if exchanger == ROOT:
            continue
        for rule in rules:
            if any(matches_suffix(exchanger, suffix) for suffix in rule.suffixes):
                providers.add(rule.provider)
    return providers


def is_private_or_local(address: str) -> bool:
    ip = ipaddress.ip_address(address)
    return any(ip.version == net.version and ip in net for net in PRIVATE_OR_LOCAL_NETWORKS)


def detect_private_or_local(addresses: Iterable[str]) -> bool:
    """True iff any address is RFC 1918 / RFC 4193 private, loopback 127/8 or ::1."""
    return any(is_private_or_local(a) for a in addresses)


def detect_duplicates(exchangers: Sequence[ResolvedExchanger]) -> bool:
    """True iff some address appears under two distinct exchanger names."""
    owners: Dict[str, str] = {}
    for exchanger in exchangers:
        for address in set(exchanger.addresses):
            first = owners.setdefault(address, exchanger.exchanger)
            if first != exchanger.exchanger:
                return True
    return False


def _missing_ptr(exchangers: Sequence[ResolvedExchanger], family: str) -> bool:
    for exchanger in exchangers:
        addresses = exchanger.ipv4 if family == "v4" else exchanger.ipv6
        if any(exchanger.ptr[a].status != PtrStatus.FOUND for a in addresses):
            return True
    return False


def audit(profile: DomainProfile, rules: Sequence[HostingRule] = DEFAULT_HOSTING_RULES) -> DomainProfile:
    """
    Classify a resolved profile and set its audit flags.

    Errored profiles keep classification None; TXT-based flags are still set.

    Returns:
        A new profile with classification and flags filled in
    """
    has_spf, deny_all, strict = detect_spf(profile.txt)
    spf_flags = dict(has_spf=has_spf, spf_deny_all=deny_all, spf_strict=strict)

    if profile.errored:
        return profile.model_copy(update={"classification": None, "flags": AuditFlags(**spf_flags)})

    if profile.mx.n_m == 0:
        return profile.model_copy(update={
            "classification": Classification.NO_MX,
            "flags": AuditFlags(**spf_flags),
        })

    if is_null_mx(profile.mx):
        return profile.model_copy(update={
            "classification": Classification.NULL_MX,
            "flags": AuditFlags(**spf_flags),
        })

    exchangers = profile.exchangers
    ipv4 = [a for e in exchangers for a in e.ipv4]
    ipv6 = [a for e in exchangers for a in e.ipv6]
    private_v4 = detect_private_or_local(ipv4)
    private_v6 = detect_private_or_local(ipv6)

    flags = AuditFlags(
        **spf_flags,
        hosting=tuple(detect_hosting(profile.mx, rules)),
        has_nxdomain_exchanger=any(e.unresolvable for e in exchangers),
        has_private_or_local_address=private_v4 or private_v6,
        has_private_or_local_v4=private_v4,
        has_private_or_local_v6=private_v6,
        has_missing_ptr_v4=_missing_ptr(exchangers, "v4"),
        has_missing_ptr_v6=_missing_ptr(exchangers, "v6"),
        has_duplicate_addresses=detect_duplicates(exchangers),
        has_cname_exchanger=any(e.is_cname_target for e in exchangers),
        has_ipv6=bool(ipv6),
        has_nonstandard_name=any(not is_strict_hostname(e.exchanger) for e in exchangers),
        has_malformed_mx=any(r.malformed for r in profile.mx.records),
    )

    n_m, n_a, n_abar = derive_counts(profile)
    label = classify(n_m, n_a, n_abar)

    return profile.model_copy(update={"classification": label, "flags": flags})


def load_hosting_rules(path: Optional[Union[str, Path]]) -> Tuple[HostingRule, ...]:
    """
    Load hosting rules from JSON, or return the defaults when path is None.

    Raises:
        ParseError: if the file is not a non-empty list of rule objects
    """
    if path is None:
        return DEFAULT_HOSTING_RULES

    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.msg) from e

    if not isinstance(data, list) or not data:
        raise ParseError(path, 1, "hosting rules must be a non-empty list")

    rules: List[HostingRule] = []
    for index, item in enumerate(data):
        try:
            rules.append(HostingRule.model_validate(item))
        except ValidationError as e:
            raise ParseError(path, 1, f"rule {index}: {e.errors()[0]['msg']}") from e

    logger.info(f"Loaded {len(rules)} hosting rules from {path}")
    return tuple(rules)
