"""Schemas package."""

from .profile import (
    AuditFlags,
    Classification,
    DomainProfile,
    HostingRule,
    MxRecord,
    MxRecordSet,
    PtrOutcome,
    PtrStatus,
    QueryStatus,
    ResolvedExchanger,
    derive_counts,
)
from .run import InputFormat, RunConfig, RunMeta
from .simulation import (
    ClientPolicy,
    PoolEntry,
    RoundRobinState,
    ServerPolicy,
    ServerPool,
    TrialReport,
)
from .summary import CorpusSummary, Histogram, KruskalWallisResult

__all__ = [
    "AuditFlags",
    "Classification",
    "DomainProfile",
    "HostingRule",
    "MxRecord",
    "MxRecordSet",
    "PtrOutcome",
    "PtrStatus",
    "QueryStatus",
    "ResolvedExchanger",
    "derive_counts",
    "InputFormat",
    "RunConfig",
    "RunMeta",
    "ClientPolicy",
    "PoolEntry",
    "RoundRobinState",
    "ServerPolicy",
    "ServerPool",
    "TrialReport",
    "CorpusSummary",
    "Histogram",
    "KruskalWallisResult",
]
