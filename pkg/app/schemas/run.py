"""
Schemas for scan runs: configuration and the metadata echoed next to the outputs.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.profile import IPAddress


class InputFormat(str, Enum):
    """Domain list formats accepted by ingest."""

    PLAIN = "plain"
    RANKED_CSV = "ranked_csv"


class RunConfig(BaseModel):
    """Validated configuration of one scan."""

    input_paths: List[str] = Field(..., min_length=1)
    input_format: InputFormat = InputFormat.PLAIN
    resolver_address: Optional[IPAddress] = None
    fixture_dir: Optional[str] = None
    concurrency: int = Field(64, gt=0)
    timeout_ms: int = Field(5000, gt=0)
    retries: int = Field(0, ge=0)
    output_dir: str = "out"
    hosting_rules_path: Optional[str] = None
    error_exit_threshold: float = Field(0.5, ge=0.0, le=1.0)
    trace_queries: bool = Field(False, description="Write every backend query to queries.txt")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _one_backend(self) -> "RunConfig":
        if (self.resolver_address is None) == (self.fixture_dir is None):
            raise ValueError("exactly one of resolver_address and fixture_dir must be set")
        return self

    @property
    def live(self) -> bool:
        return self.resolver_address is not None


class RunMeta(BaseModel):
    """run_meta.json: when and how a scan ran, and its exclusion arithmetic."""

    timestamp: str
    config: RunConfig
    k_q: int
    k_w: int
    k_nomx: int
    k_errored: int
    k_nullmx: int
    k: int
    error_count: int
    queries: Dict[str, int] = Field(default_factory=dict)
    exit_code: int
