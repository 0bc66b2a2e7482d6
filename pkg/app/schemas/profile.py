"""
Pydantic models for per-domain measurement data.

All models are frozen: a profile is built once by the resolver, then
re-created (``model_copy``) by the classifier with its labels filled in.
"""

import ipaddress
from enum import Enum
from typing import Annotated, Dict, List, Optional, Tuple, Union

from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    PositiveInt,
    computed_field,
    field_validator,
    model_validator,
)

from app.core.utils import ROOT, canonical_address, canonicalize, normalize_ttl


def _ipv4(value: str) -> str:
    text = canonical_address(value)
    if ipaddress.ip_address(text).version != 4:
        raise ValueError(f"{value} is not an IPv4 address")
    return text


def _ipv6(value: str) -> str:
    text = canonical_address(value)
    if ipaddress.ip_address(text).version != 6:
        raise ValueError(f"{value} is not an IPv6 address")
    return text


DomainName = Annotated[str, AfterValidator(canonicalize)]
IPAddress = Annotated[str, AfterValidator(canonical_address)]
IPv4Text = Annotated[str, AfterValidator(_ipv4)]
IPv6Text = Annotated[str, AfterValidator(_ipv6)]


class QueryStatus(str, Enum):
    """Outcome of a single DNS query."""

    OK = "Ok"
    NXDOMAIN = "NxDomain"
    NO_RECORDS = "NoRecords"
    TIMEOUT = "Timeout"
    SERVFAIL = "ServFail"


class PtrStatus(str, Enum):
    """Outcome of a reverse lookup."""

    FOUND = "Found"
    NOT_FOUND = "NotFound"
    ERROR = "Error"


class Classification(str, Enum):
    """Configuration label assigned to every domain."""

    NO_MX = "NoMx"
    NULL_MX = "NullMx"
    PLAIN_V4_ONLY = "PlainV4Only"
    PLAIN_V6_ONLY = "PlainV6Only"
    PLAIN_DUAL_STACK = "PlainDualStack"
    ROUND_ROBIN = "RoundRobin"
    MX_BALANCING = "MxBalancing"
    HYBRID = "Hybrid"
    NON_IDENTIFIED = "NonIdentified"


SIMPLE_CLASSES: Tuple[Classification, ...] = (
    Classification.PLAIN_V4_ONLY,
    Classification.PLAIN_V6_ONLY,
    Classification.PLAIN_DUAL_STACK,
)
BLBFO_CLASSES: Tuple[Classification, ...] = (
    Classification.ROUND_ROBIN,
    Classification.MX_BALANCING,
    Classification.HYBRID,
)
ANALYZED_CLASSES: Tuple[Classification, ...] = (
    SIMPLE_CLASSES + BLBFO_CLASSES + (Classification.NON_IDENTIFIED,)
)


class MxRecord(BaseModel):
    """One MX resource record: preference, exchanger and TTL."""

    preference: int = Field(..., ge=0, le=65535, description="MX preference (lower is preferred)")
    exchanger: str = Field(..., description="Exchanger name, or '.' for the root")
    ttl: int = Field(0, ge=0, description="Record TTL in seconds")

    model_config = ConfigDict(frozen=True)

    @field_validator("exchanger")
    @classmethod
    def _canonical_exchanger(cls, value: str) -> str:
        if value.strip() == ROOT:
            return ROOT
        return canonicalize(value)

    @field_validator("ttl")
    @classmethod
    def _clear_top_bit_ttl(cls, value: int) -> int:
        return normalize_ttl(value)

    @computed_field  # type: ignore[misc]
    @property
    def malformed(self) -> bool:
        """A root exchanger outside the Null-MX form."""
        return self.exchanger == ROOT and self.preference != 0


class MxRecordSet(BaseModel):
    """A domain's MX RRset, in the order it was returned (vectors m and p)."""

    records: Tuple[MxRecord, ...] = Field(default_factory=tuple)

    model_config = ConfigDict(frozen=True)

    @computed_field  # type: ignore[misc]
    @property
    def n_m(self) -> int:
        return len(self.records)

    @computed_field  # type: ignore[misc]
    @property
    def min_ttl(self) -> Optional[int]:
        """Effective cache lifetime of the RRset."""
        if not self.records:
            return None
        return min(r.ttl for r in self.records)

    @property
    def preferences(self) -> List[int]:
        return [r.preference for r in self.records]

    @property
    def exchangers(self) -> List[str]:
        return [r.exchanger for r in self.records]

    def distinct_exchangers(self) -> List[str]:
        """Exchanger names in first-seen order, duplicates and '.' removed."""
        seen: Dict[str, None] = {}
        for name in self.exchangers:
            if name != ROOT:
                seen.setdefault(name, None)
        return list(seen)


class PtrOutcome(BaseModel):
    """Result of the reverse lookup of one exchanger address."""

    status: PtrStatus
    names: Tuple[DomainName, ...] = Field(default_factory=tuple)
    forward_confirmed: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _confirmed_requires_found(self) -> "PtrOutcome":
        if self.forward_confirmed and self.status != PtrStatus.FOUND:
            raise ValueError("forward_confirmed requires a Found PTR")
        return self


class ResolvedExchanger(BaseModel):
    """One exchanger name with its addresses and their reverse lookups."""

    exchanger: DomainName
    ipv4: Tuple[IPv4Text, ...] = Field(default_factory=tuple)
    ipv6: Tuple[IPv6Text, ...] = Field(default_factory=tuple)
    ptr: Dict[IPAddress, PtrOutcome] = Field(default_factory=dict)
    a_status: QueryStatus = QueryStatus.NO_RECORDS
    aaaa_status: QueryStatus = QueryStatus.NO_RECORDS
    is_cname_target: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ResolvedExchanger":
        if self.ipv4 and self.a_status != QueryStatus.OK:
            raise ValueError(f"{self.exchanger}: IPv4 addresses with A status {self.a_status.value}")
        if self.ipv6 and self.aaaa_status != QueryStatus.OK:
            raise ValueError(f"{self.exchanger}: IPv6 addresses with AAAA status {self.aaaa_status.value}")
        if set(self.ptr) != set(self.addresses):
            raise ValueError(f"{self.exchanger}: PTR outcomes must cover exactly the resolved addresses")
        return self

    @property
    def addresses(self) -> List[str]:
        return list(self.ipv4) + list(self.ipv6)

    @property
    def unresolvable(self) -> bool:
        """Neither the A nor the AAAA query succeeded."""
        return self.a_status != QueryStatus.OK and self.aaaa_status != QueryStatus.OK


class HostingRule(BaseModel):
    """Provider label and the exchanger suffixes that identify it."""

    provider: str = Field(..., min_length=1)
    suffixes: Tuple[DomainName, ...] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)


class AuditFlags(BaseModel):
    """Misconfiguration and detail flags; every field independently settable."""

    has_spf: bool = False
    spf_strict: bool = False
    spf_deny_all: bool = False
    hosting: Tuple[str, ...] = Field(default_factory=tuple, description="Matched hosting providers")
    has_nxdomain_exchanger: bool = False
    has_private_or_local_address: bool = False
    has_private_or_local_v4: bool = False
    has_private_or_local_v6: bool = False
    has_missing_ptr_v4: bool = False
    has_missing_ptr_v6: bool = False
    has_duplicate_addresses: bool = False
    has_cname_exchanger: bool = False
    has_ipv6: bool = False
    has_nonstandard_name: bool = False
    has_malformed_mx: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("hosting")
    @classmethod
    def _sorted_unique(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(sorted(set(value)))


class DomainProfile(BaseModel):
    """Complete measurement of one domain."""

    domain: DomainName
    median_rank: Optional[Union[PositiveInt, PositiveFloat]] = Field(None, description="Median popularity rank")
    mx_status: QueryStatus = QueryStatus.OK
    txt_status: QueryStatus = QueryStatus.OK
    errored: bool = False
    error: Optional[str] = None
    mx: MxRecordSet = Field(default_factory=MxRecordSet)
    exchangers: Tuple[ResolvedExchanger, ...] = Field(default_factory=tuple)
    txt: Tuple[str, ...] = Field(default_factory=tuple)
    classification: Optional[Classification] = None
    flags: AuditFlags = Field(default_factory=AuditFlags)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_exchangers(self) -> "DomainProfile":
        names = [e.exchanger for e in self.exchangers]
        if len(names) != len(set(names)):
            raise ValueError(f"{self.domain}: duplicate resolved exchangers")
        unknown = set(names) - set(self.mx.exchangers)
        if unknown:
            raise ValueError(f"{self.domain}: exchangers not in the MX set: {sorted(unknown)}")
        return self

    @computed_field  # type: ignore[misc]
    @property
    def n_a(self) -> int:
        return sum(len(e.ipv4) for e in self.exchangers)

    @computed_field  # type: ignore[misc]
    @property
    def n_abar(self) -> int:
        return sum(len(e.ipv6) for e in self.exchangers)


def derive_counts(profile: DomainProfile) -> Tuple[int, int, int]:
    """
    Derive (n_m, n_a, n_abar) for a profile.

    Addresses shared by several exchangers are counted once per exchanger.

    Example:
        >>> derive_counts(round_robin_profile)   # 1 MX -> 2 A
        (1, 2, 0)
    """
    return profile.mx.n_m, profile.n_a, profile.n_abar
