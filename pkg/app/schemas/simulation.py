"""
Schemas for the MTA exchanger-selection simulator.
"""

from enum import Enum
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.utils import canonical_address
from app.schemas.profile import DomainName, IPAddress


class ClientPolicy(str, Enum):
    """How a client MTA picks among the addresses of one exchanger."""

    FIRST_ADDRESS = "first"
    RANDOM_ADDRESS = "random"


class ServerPolicy(str, Enum):
    """How the authoritative server orders an address RRset per query."""

    ROTATE = "rotate"
    SHUFFLE = "shuffle"


class PoolEntry(BaseModel):
    """One exchanger of a pool with per-address availability."""

    exchanger: DomainName
    preference: int = Field(..., ge=0, le=65535)
    addresses: Tuple[IPAddress, ...] = Field(..., min_length=1)
    available: Tuple[bool, ...] = Field(default_factory=tuple, description="Defaults to all available")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _default_available(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("available"):
            data = {**data, "available": [True] * len(data.get("addresses") or ())}
        return data

    @model_validator(mode="after")
    def _check_availability(self) -> "PoolEntry":
        if len(self.available) != len(self.addresses):
            raise ValueError(f"{self.exchanger}: one availability flag per address required")
        return self


class ServerPool(BaseModel):
    """The exchangers a client may deliver to."""

    entries: Tuple[PoolEntry, ...] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_repeated_exchangers(self) -> "ServerPool":
        seen: Dict[str, Tuple[str, ...]] = {}
        for entry in self.entries:
            if seen.setdefault(entry.exchanger, entry.addresses) != entry.addresses:
                raise ValueError(f"{entry.exchanger}: listed twice with different addresses")
        return self

    def addresses_by_exchanger(self) -> Dict[str, Tuple[str, ...]]:
        """Address RRset of each distinct exchanger, in pool order."""
        return {e.exchanger: e.addresses for e in self.entries}

    def pairs(self) -> List[Tuple[str, str]]:
        """Every (exchanger, address) pair in pool order."""
        return [(e.exchanger, a) for e in self.entries for a in e.addresses]

    def with_unavailable(self, addresses: List[str]) -> "ServerPool":
        """Copy of the pool with the given addresses marked down."""
        down = {canonical_address(a) for a in addresses}
        entries = tuple(
            e.model_copy(update={"available": tuple(
                ok and a not in down for a, ok in zip(e.addresses, e.available)
            )})
            for e in self.entries
        )
        return self.model_copy(update={"entries": entries})


class RoundRobinState(BaseModel):
    """Server-side answer order of one address RRset."""

    order: Tuple[str, ...]
    rotation_index: int = Field(0, ge=0, description="Rotations applied so far, modulo the RRset size")

    model_config = ConfigDict(frozen=True)


class TrialReport(BaseModel):
    """Delivery outcome counts of a simulation run."""

    trials: int = Field(..., gt=0)
    seed: int
    client_policy: ClientPolicy
    server_policy: ServerPolicy
    selection_counts: Dict[str, int]
    exchanger_counts: Dict[str, int]
    failed_deliveries: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_total(self) -> "TrialReport":
        if sum(self.selection_counts.values()) + self.failed_deliveries != self.trials:
            raise ValueError("selection counts plus failures must equal trials")
        return self

    def share(self, exchanger: str) -> float:
        return self.exchanger_counts.get(exchanger, 0) / self.trials
