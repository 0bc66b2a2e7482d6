"""
Pydantic schemas for corpus-level statistics.
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Histogram(BaseModel):
    """Half-open bins [edge_i, edge_i+1) with one count per bin."""

    bin_edges: Tuple[float, ...] = Field(..., min_length=2, description="Strictly increasing bin edges")
    counts: Tuple[int, ...] = Field(..., description="Observations per bin")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_shape(self) -> "Histogram":
        if len(self.counts) != len(self.bin_edges) - 1:
            raise ValueError("counts must have one entry per bin")
        if any(lo >= hi for lo, hi in zip(self.bin_edges, self.bin_edges[1:])):
            raise ValueError("bin_edges must be strictly increasing")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        return self

    @property
    def total(self) -> int:
        return sum(self.counts)

    def rows(self) -> List[Tuple[float, float, int]]:
        """(bin_low, bin_high, count) rows for CSV export."""
        return [
            (lo, hi, count)
            for lo, hi, count in zip(self.bin_edges, self.bin_edges[1:], self.counts)
        ]


class KruskalWallisResult(BaseModel):
    """H statistic and chi-square tail probability."""

    h: float
    p_value: float
    df: int
    n: int

    model_config = ConfigDict(frozen=True)


class CorpusSummary(BaseModel):
    """Aggregate statistics of one scan."""

    # Sample accounting: k = k_q - (k_w + k_nullmx)
    k_q: int = Field(..., ge=0, description="Domains queried")
    k_w: int = Field(..., ge=0, description="Domains excluded for missing MX or resolution errors")
    k_nomx: int = Field(..., ge=0, description="Domains without MX records")
    k_errored: int = Field(..., ge=0, description="Domains whose MX query failed")
    k_nullmx: int = Field(..., ge=0, description="Null-MX domains")
    k: int = Field(..., ge=0, description="Domains analyzed")

    # Configurations
    class_counts: Dict[str, int]
    class_shares: Dict[str, float]
    simple_share: float
    blbfo_share: float
    inferred_labels: List[str] = Field(default_factory=list)

    # Record counts
    mx_count_hist: Histogram
    a_count_hist: Histogram
    aaaa_count_hist: Histogram
    corr_mx_a: Optional[float] = None
    corr_mx_aaaa: Optional[float] = None
    single_a_share: float
    ipv6_share: float

    # Preferences and TTLs
    pref_stddev_hist: Histogram
    equal_pref_share: Optional[float] = None
    ttl_hist: Histogram
    ttl_below_2000_share: Optional[float] = None

    # Hosting
    hosting_share: float
    hosting_provider_shares: Dict[str, float]
    hosting_crosstab: Dict[str, Dict[str, float]]

    # Popularity
    rank_medians: Dict[str, float]
    kruskal_wallis: Optional[KruskalWallisResult] = None

    # Misconfigurations and details
    spf_share: float
    spf_strict_share: float
    spf_deny_all_share: float
    spf_share_by_group: Dict[str, float]
    nxdomain_exchanger_share: float
    private_v4_count: int
    private_v6_count: int
    missing_ptr_v4_share: float
    missing_ptr_v6_share: float
    duplicate_address_share: float
    cname_exchanger_share: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_identity(self) -> "CorpusSummary":
        if self.k != self.k_q - (self.k_w + self.k_nullmx):
            raise ValueError("k must equal k_q - (k_w + k_nullmx)")
        if self.k_w != self.k_nomx + self.k_errored:
            raise ValueError("k_w must equal k_nomx + k_errored")
        return self
