"""
Tests for classification, Null-MX screening and the audit detectors.
"""

import json
import random

import pytest

from app.core.exceptions import ParseError
from app.schemas.profile import (
    BLBFO_CLASSES,
    SIMPLE_CLASSES,
    Classification,
    DomainProfile,
    HostingRule,
    MxRecord,
    MxRecordSet,
    PtrOutcome,
    PtrStatus,
    QueryStatus,
    ResolvedExchanger,
)
from app.services.classifier import (
    DEFAULT_HOSTING_RULES,
    audit,
    classify,
    detect_duplicates,
    detect_hosting,
    detect_private_or_local,
    detect_spf,
    is_null_mx,
    load_hosting_rules,
)
from app.services.resolver import resolve_domain
from tests.conftest import backend_from, ok


def _mx(*pairs):
    return MxRecordSet(records=tuple(MxRecord(preference=p, exchanger=e, ttl=3600) for p, e in pairs))


def _exchanger(name, ipv4=(), ipv6=(), ptr_status=PtrStatus.FOUND, a_status=None, aaaa_status=None, cname=False):
    addresses = list(ipv4) + list(ipv6)
    return ResolvedExchanger(
        exchanger=name,
        ipv4=tuple(ipv4),
        ipv6=tuple(ipv6),
        ptr={a: PtrOutcome(status=ptr_status) for a in addresses},
        a_status=a_status or (QueryStatus.OK if ipv4 else QueryStatus.NO_RECORDS),
        aaaa_status=aaaa_status or (QueryStatus.OK if ipv6 else QueryStatus.NO_RECORDS),
        is_cname_target=cname,
    )


def _reference_label(n_m, n_a, n_abar):
    """Each definition evaluated independently, for cross-checking the ordered rules."""
    matches = []
    if n_m == 0:
        matches.append(Classification.NO_MX)
    if n_m == 1 and n_a == 1 and n_abar == 0:
        matches.append(Classification.PLAIN_V4_ONLY)
    if n_m == 1 and n_a == 0 and n_abar == 1:
        matches.append(Classification.PLAIN_V6_ONLY)
    if n_m == 1 and n_a == 1 and n_abar == 1:
        matches.append(Classification.PLAIN_DUAL_STACK)
    if n_m == 1 and (n_a > 1 or n_abar > 1):
        matches.append(Classification.ROUND_ROBIN)
    if n_m > 1 and (n_a == n_m or n_abar == n_m):
        matches.append(Classification.MX_BALANCING)
    if n_m > 1 and not (n_a == n_m or n_abar == n_m) and n_a + n_abar > 0:
        matches.append(Classification.HYBRID)
    assert len(matches) <= 1
    return matches[0] if matches else Classification.NON_IDENTIFIED


class TestClassify:
    """Test suite for classify."""

    @pytest.mark.parametrize("counts,expected", [
        ((1, 2, 0), Classification.ROUND_ROBIN),
        ((2, 3, 0), Classification.HYBRID),
        ((2, 2, 0), Classification.MX_BALANCING),
        ((1, 1, 1), Classification.PLAIN_DUAL_STACK),
        ((1, 0, 0), Classification.NON_IDENTIFIED),
        ((17, 173, 0), Classification.HYBRID),
        ((1, 1, 0), Classification.PLAIN_V4_ONLY),
        ((1, 0, 1), Classification.PLAIN_V6_ONLY),
        ((3, 0, 3), Classification.MX_BALANCING),
        ((0, 0, 0), Classification.NO_MX),
    ])
    def test_examples(self, counts, expected):
        assert classify(*counts) == expected

    def test_exhaustive_sweep(self):
        for n_m in range(21):
            for n_a in range(21):
                for n_abar in range(21):
                    assert classify(n_m, n_a, n_abar) == _reference_label(n_m, n_a, n_abar)

    def test_no_mx_for_any_address_count(self):
        for n_a in range(5):
            for n_abar in range(5):
                assert classify(0, n_a, n_abar) == Classification.NO_MX

    def test_dual_stack_ordering(self):
        for k in range(2, 10):
            assert classify(1, 1, k) == Classification.ROUND_ROBIN
            assert classify(1, k, 1) == Classification.ROUND_ROBIN

    def test_resolution_failure(self):
        assert classify(1, 1, 0, resolution_ok=False) == Classification.NON_IDENTIFIED

    def test_partition_is_exact(self):
        assert not set(SIMPLE_CLASSES) & set(BLBFO_CLASSES)


class TestNullMx:
    """Test suite for is_null_mx."""

    @pytest.mark.parametrize("pairs,expected", [
        (((0, "."),), True),
        (((0, "."), (10, "mx.x.tld")), False),
        (((10, "."),), False),
        (((0, "mx.x.tld"),), False),
        (((10, "mx.x.tld"),), False),
        (((10, "."), (20, ".")), False),
        (((0, "."), (0, ".")), False),
        ((), False),
    ])
    def test_combinations(self, pairs, expected):
        assert is_null_mx(_mx(*pairs)) == expected


class TestDetectors:
    """Test suite for the individual detectors."""

    @pytest.mark.parametrize("txt,expected", [
        (["v=spf1 include:x.tld ~all"], (True, False, True)),
        (["v=spf1 -all"], (True, True, True)),
        (["  V=SPF1    -ALL "], (True, True, True)),
        (["verification=abc123"], (False, False, False)),
        (["some text v=spf1 mx"], (True, False, False)),
        ([], (False, False, False)),
    ])
    def test_spf(self, txt, expected):
        assert detect_spf(txt) == expected

    @pytest.mark.parametrize("exchanger,expected", [
        ("aspmx.l.google.com", {"Google"}),
        ("alt1.aspmx.l.googlemail.com", {"Google"}),
        ("domain-tld.mail.protection.outlook.com", {"Microsoft"}),
        ("notgoogle.com", set()),
        ("google.com.evil.tld", set()),
    ])
    def test_hosting(self, exchanger, expected):
        assert detect_hosting(_mx((10, exchanger))) == expected

    def test_hosting_matches_whole_labels_only(self):
        rng = random.Random(7)
        alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
        suffixes = [(rule.provider, suffix) for rule in DEFAULT_HOSTING_RULES for suffix in rule.suffixes]
        for _ in range(1000):
            provider, suffix = rng.choice(suffixes)
            prefix = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
            assert detect_hosting(_mx((10, f"{prefix}.{suffix}"))) == {provider}
            assert detect_hosting(_mx((10, prefix + suffix))) == set()

    def test_custom_rules(self):
        rules = [HostingRule(provider="Example", suffixes=("mail.example",))]
        assert detect_hosting(_mx((10, "in.mail.example")), rules) == {"Example"}

    @pytest.mark.parametrize("address,expected", [
        ("192.168.1.10", True),
        ("10.0.0.0", True),
        ("10.255.255.255", True),
        ("9.255.255.255", False),
        ("11.0.0.0", False),
        ("192.168.0.0", True),
        ("192.169.0.0", False),
        ("127.255.255.255", True),
        ("128.0.0.0", False),
        ("fdff:ffff:ffff:ffff:ffff:ffff:ffff:ffff", True),
        ("fbff:ffff:ffff:ffff:ffff:ffff:ffff:ffff", False),
        ("172.16.0.0", True),
        ("172.31.255.255", True),
        ("172.32.0.0", False),
        ("172.15.255.255", False),
        ("127.0.0.1", True),
        ("fd12::1", True),
        ("fc00::", True),
        ("fe00::", False),
        ("::1", True),
        ("::2", False),
        ("8.8.8.8", False),
        ("2001:4860::8888", False),
    ])
    def test_private_or_local(self, address, expected):
        assert detect_private_or_local([address]) == expected

    def test_duplicates(self):
        shared = [_exchanger("mx1.tld", ipv4=("1.2.3.4",)), _exchanger("mx2.tld", ipv4=("1.2.3.4",))]
        disjoint = [_exchanger("mx1.tld", ipv4=("1.2.3.4",)), _exchanger("mx2.tld", ipv4=("1.2.3.5",))]
        assert detect_duplicates(shared)
        assert not detect_duplicates(disjoint)
        assert not detect_duplicates(shared[:1])


class TestAudit:
    """Test suite for audit."""

    async def test_round_robin_profile(self, round_robin_fixtures):
        fixtures = dict(round_robin_fixtures)
        fixtures["2.2.0.192.in-addr.arpa PTR"] = ok("mx.domain.tld.")
        profile = audit(await resolve_domain("domain.tld", backend_from(fixtures)))

        assert profile.classification == Classification.ROUND_ROBIN
        flags = profile.flags
        assert flags.has_spf and flags.spf_strict and not flags.spf_deny_all
        assert not any([
            flags.hosting,
            flags.has_nxdomain_exchanger,
            flags.has_private_or_local_address,
            flags.has_missing_ptr_v4,
            flags.has_missing_ptr_v6,
            flags.has_duplicate_addresses,
            flags.has_cname_exchanger,
            flags.has_ipv6,
        ])

    def test_one_unresolvable_of_three(self):
        profile = DomainProfile(
            domain="domain.tld",
            mx=_mx((10, "a.domain.tld"), (20, "b.domain.tld"), (30, "c.domain.tld")),
            exchangers=(
                _exchanger("a.domain.tld", ipv4=("192.0.2.1",)),
                _exchanger("b.domain.tld", ipv4=("192.0.2.2",)),
                _exchanger("c.domain.tld", a_status=QueryStatus.NXDOMAIN, aaaa_status=QueryStatus.NXDOMAIN),
            ),
        )
        audited = audit(profile)
        assert audited.flags.has_nxdomain_exchanger
        assert audited.classification == classify(3, 2, 0) == Classification.HYBRID

    def test_null_mx_profile(self):
        audited = audit(DomainProfile(domain="domain.tld", mx=_mx((0, ".")), txt=("v=spf1 -all",)))
        assert audited.classification == Classification.NULL_MX
        assert audited.flags.spf_deny_all
        assert not audited.flags.has_nxdomain_exchanger
        assert not audited.flags.has_missing_ptr_v4

    def test_no_mx_profile(self):
        audited = audit(DomainProfile(domain="domain.tld", mx_status=QueryStatus.NO_RECORDS))
        assert audited.classification == Classification.NO_MX

    def test_errored_profile_keeps_no_label(self):
        profile = DomainProfile(domain="domain.tld", mx_status=QueryStatus.SERVFAIL, errored=True, error="x")
        assert audit(profile).classification is None

    def test_missing_ptr_and_private(self):
        profile = DomainProfile(
            domain="domain.tld",
            mx=_mx((10, "mx.domain.tld")),
            exchangers=(_exchanger(
                "mx.domain.tld", ipv4=("10.1.2.3",), ipv6=("2001:db8::1",), ptr_status=PtrStatus.NOT_FOUND,
            ),),
        )
        flags = audit(profile).flags
        assert flags.has_private_or_local_v4 and not flags.has_private_or_local_v6
        assert flags.has_missing_ptr_v4 and flags.has_missing_ptr_v6
        assert flags.has_ipv6

    def test_nonstandard_and_malformed(self):
        profile = DomainProfile(
            domain="domain.tld",
            mx=_mx((10, "mail_in.domain.tld"), (10, ".")),
            exchangers=(_exchanger("mail_in.domain.tld", ipv4=("192.0.2.1",)),),
        )
        flags = audit(profile).flags
        assert flags.has_nonstandard_name
        assert flags.has_malformed_mx

    def test_flags_independent(self):
        base = DomainProfile(
            domain="domain.tld",
            mx=_mx((10, "mx1.domain.tld"), (20, "mx2.domain.tld")),
            exchangers=(
                _exchanger("mx1.domain.tld", ipv4=("192.0.2.1",)),
                _exchanger("mx2.domain.tld", ipv4=("192.0.2.2",)),
            ),
        )
        baseline = audit(base).flags.model_dump()

        perturbed = {
            "has_cname_exchanger": base.model_copy(update={"exchangers": (
                _exchanger("mx1.domain.tld", ipv4=("192.0.2.1",), cname=True),
                base.exchangers[1],
            )}),
            "has_spf": base.model_copy(update={"txt": ("v=spf1 ?all",)}),
            "has_missing_ptr_v4": base.model_copy(update={"exchangers": (
                _exchanger("mx1.domain.tld", ipv4=("192.0.2.1",), ptr_status=PtrStatus.ERROR),
                base.exchangers[1],
            )}),
        }
        for flag, profile in perturbed.items():
            changed = {k for k, v in audit(profile).flags.model_dump().items() if v != baseline[k]}
            expected = {flag, "spf_strict"} if flag == "has_spf" else {flag}
            assert changed == expected


class TestHostingRules:
    """Test suite for loading hosting rules."""

    def test_defaults(self):
        rules = load_hosting_rules(None)
        assert {r.provider for r in rules} == {"Microsoft", "Google"}

    def test_load_file(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([{"provider": "Example", "suffixes": ["Mail.Example."]}]))
        rules = load_hosting_rules(path)
        assert rules[0].suffixes == ("mail.example",)

    def test_invalid_file(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps({"provider": "Example"}))
        with pytest.raises(ParseError):
            load_hosting_rules(path)
