"""
Corpus Statistics Module

Aggregates audited profiles into a CorpusSummary:

- configuration counts and shares with the k = k_q - (k_w + k_nullmx) accounting
- MX/A/AAAA count histograms and Pearson correlations
- preference standard deviations and set-level TTLs
- hosting cross-tabulation, SPF and misconfiguration shares
- median popularity ranks per configuration and the Kruskal-Wallis test

Author: Development Team
Version: 1.0.0
"""

import csv
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaincc
from scipy.stats import rankdata

from app.core.exceptions import DegenerateInput, EmptyCorpus
from app.core.utils import MAX_TTL
from app.schemas.profile import (
    ANALYZED_CLASSES,
    BLBFO_CLASSES,
    SIMPLE_CLASSES,
    Classification,
    DomainProfile,
    derive_counts,
)
from app.schemas.summary import CorpusSummary, Histogram, KruskalWallisResult

logger = logging.getLogger(__name__)

Number = Union[int, float]

# MxRecord zeroes TTLs above MAX_TTL, so this edge closes the open-ended last bin
TTL_BIN_EDGES: Tuple[float, ...] = (0, 300, 600, 2000, 3600, 14400, 86400, MAX_TTL + 1)
PREF_STDDEV_BIN_WIDTH = 5.0
MX_COUNT_CAP = 20
ADDRESS_COUNT_CAP = 50

HOSTING_GROUPS: Dict[str, Tuple[Classification, ...]] = {
    "Simple": SIMPLE_CLASSES,
    "RoundRobin": (Classification.ROUND_ROBIN,),
    "MxBalancing": (Classification.MX_BALANCING,),
    "Hybrid": (Classification.HYBRID,),
}

# NonIdentified is the zero-address inference, not a measured definition
INFERRED_LABELS = [Classification.NON_IDENTIFIED.value]


# ---------------------------------------------------------------------------
# Elementary statistics
# ---------------------------------------------------------------------------

def pearson(x: Sequence[Number], y: Sequence[Number]) -> float:
    """
    Pearson product-moment correlation coefficient.

    Raises:
        DegenerateInput: for unequal lengths, fewer than two points, or a
            constant vector
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise DegenerateInput("pearson needs two vectors of equal length >= 2")

    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("pearson is undefined for a constant vector")

    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pref_stddev(preferences: Sequence[Number]) -> float:
    """Population (divisor n) standard deviation of a preference vector."""
    values = np.asarray(preferences, dtype=float)
    if values.size == 0:
        raise DegenerateInput("pref_stddev needs at least one preference")
    return float(np.std(values))


def median_rank(ranks: Sequence[Number]) -> Number:
    """Median of popularity ranks; an integer unless the middle pair straddles one."""
    if len(ranks) == 0:
        raise DegenerateInput("median_rank needs at least one rank")
    median = float(np.median(np.asarray(ranks, dtype=float)))
    return int(median) if median.is_integer() else median


def kruskal_wallis(groups: Sequence[Sequence[Number]]) -> KruskalWallisResult:
    """
    Kruskal-Wallis H test with midranks and the standard tie correction.

    The p-value is the chi-square upper tail with (groups - 1) degrees of
    freedom, i.e. the regularized upper incomplete gamma Q(df/2, H/2).

    Raises:
        DegenerateInput: for fewer than two groups, an empty group, fewer
            than three observations, or all observations identical

    Example:
        >>> kruskal_wallis([[1, 2, 3], [4, 5, 6], [7, 8, 9]]).h
        7.2
    """
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise DegenerateInput("kruskal_wallis needs at least two non-empty groups")

    data = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    n = data.size
    if n < 3:
        raise DegenerateInput("kruskal_wallis needs at least three observations")

    _, ties = np.unique(data, return_counts=True)
    ties = ties.astype(float)
    correction = 1.0 - float(np.sum(ties ** 3 - ties)) / (n ** 3 - n)
    if correction == 0.0:
        raise DegenerateInput("all observations are identical")

    ranks = rankdata(data)  # average ranks for ties
    bounds = np.cumsum([0] + [len(g) for g in groups])
    rank_term = sum(
        float(np.sum(ranks[lo:hi])) ** 2 / (hi - lo)
        for lo, hi in zip(bounds[:-1], bounds[1:])
    )

    h = (12.0 * rank_term) / (n * (n + 1)) - 3.0 * (n + 1)
    h /= correction

    df = len(groups) - 1
    p_value = float(gammaincc(df / 2.0, max(h, 0.0) / 2.0))
    return KruskalWallisResult(h=h, p_value=p_value, df=df, n=int(n))


# ---------------------------------------------------------------------------
# Histograms
# ---------------------------------------------------------------------------

def histogram(values: Iterable[Number], edges: Sequence[float]) -> Histogram:
    """
    Count values into half-open bins [edge_i, edge_i+1).

    Raises:
        ValueError: if a value falls outside [edges[0], edges[-1])
    """
    data = np.asarray(list(values), dtype=float)
    bins = np.asarray(edges, dtype=float)

    if data.size and (data.min() < bins[0] or data.max() >= bins[-1]):
        raise ValueError(f"values outside [{bins[0]}, {bins[-1]})")

    index = np.searchsorted(bins, data, side="right") - 1
    counts = np.bincount(index.astype(int), minlength=len(bins) - 1)
    return Histogram(bin_edges=tuple(float(e) for e in bins), counts=tuple(int(c) for c in counts))


def count_edges(values: Sequence[int], low: int, cap: int) -> List[float]:
    """Integer bins low..cap-1 plus an open 'cap and above' bin."""
    top = max([cap + 1] + [v + 1 for v in values])
    return [float(v) for v in range(low, cap + 1)] + [float(top)]


def stddev_edges(values: Sequence[float], width: float = PREF_STDDEV_BIN_WIDTH) -> List[float]:
    top = max(values, default=0.0)
    n_bins = int(math.floor(top / width)) + 1
    return [i * width for i in range(n_bins + 1)]


def write_histogram_csv(hist: Histogram, path: Union[str, Path]) -> None:
    """Export a histogram as "bin_low,bin_high,count" rows."""

    def fmt(edge: float) -> str:
        return str(int(edge)) if float(edge).is_integer() else repr(edge)

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["bin_low", "bin_high", "count"])
        for low, high, count in hist.rows():
            writer.writerow([fmt(low), fmt(high), count])


# ---------------------------------------------------------------------------
# Corpus summary
# ---------------------------------------------------------------------------

def _share(part: int, whole: int) -> float:
    return part / whole if whole else 0.0


def _optional(fn, *args) -> Optional[float]:
    try:
        return fn(*args)
    except DegenerateInput as e:
        logger.debug(f"{fn.__name__} skipped: {e}")
        return None


def _rank_statistics(
    analyzed: List[DomainProfile],
) -> Tuple[Dict[str, float], Optional[KruskalWallisResult]]:
    groups: Dict[str, List[Number]] = {}
    for label in SIMPLE_CLASSES + BLBFO_CLASSES:
        ranks = [p.median_rank for p in analyzed if p.classification == label and p.median_rank is not None]
        if ranks:
            groups[label.value] = ranks

    medians = {label: float(median_rank(ranks)) for label, ranks in groups.items()}

    result = None
    if len(groups) >= 2:
        try:
            result = kruskal_wallis(list(groups.values()))
        except DegenerateInput as e:
            logger.info(f"Kruskal-Wallis test skipped: {e}")
    return medians, result


def summarize(
    profiles: Iterable[DomainProfile],
    excluded_counts: Tuple[int, int, int] = (0, 0, 0),
) -> CorpusSummary:
    """
    Compute every corpus aggregate from audited profiles.

    Args:
        profiles: Audited profiles; errored, no-MX and Null-MX profiles may be
            included and are counted into the exclusions
        excluded_counts: (errored, no_mx, null_mx) domains that are not in
            ``profiles`` but were part of the queried corpus

    Raises:
        EmptyCorpus: if no domain was queried at all
        ValueError: if a non-errored profile has not been audited
    """
    profiles = sorted(profiles, key=lambda p: p.domain)
    extra_errored, extra_nomx, extra_nullmx = excluded_counts

    unlabeled = [p.domain for p in profiles if not p.errored and p.classification is None]
    if unlabeled:
        raise ValueError(f"profiles must be audited before summarizing: {unlabeled[:3]}")

    errored = [p for p in profiles if p.errored]
    nomx = [p for p in profiles if p.classification == Classification.NO_MX]
    nullmx = [p for p in profiles if p.classification == Classification.NULL_MX]
    analyzed = [p for p in profiles if p.classification in ANALYZED_CLASSES]

    k_q = len(profiles) + extra_errored + extra_nomx + extra_nullmx
    if k_q == 0:
        raise EmptyCorpus("no domains to summarize")

    k_errored = len(errored) + extra_errored
    k_nomx = len(nomx) + extra_nomx
    k_nullmx = len(nullmx) + extra_nullmx
    k = len(analyzed)

    logger.info(f"Summarizing k_q={k_q}: k={k}, no MX={k_nomx}, errored={k_errored}, Null MX={k_nullmx}")

    # Configurations
    class_counts = {label.value: 0 for label in Classification}
    for p in profiles:
        if p.classification is not None:
            class_counts[p.classification.value] += 1
    class_counts[Classification.NO_MX.value] = k_nomx
    class_counts[Classification.NULL_MX.value] = k_nullmx

    class_shares = {label.value: _share(class_counts[label.value], k) for label in ANALYZED_CLASSES}
    n_simple = sum(class_counts[c.value] for c in SIMPLE_CLASSES)
    n_blbfo = sum(class_counts[c.value] for c in BLBFO_CLASSES)

    # Record counts
    counts = [derive_counts(p) for p in analyzed]
    n_m = [c[0] for c in counts]
    n_a = [c[1] for c in counts]
    n_abar = [c[2] for c in counts]

    # Preferences and TTLs
    multi = [p for p in analyzed if p.mx.n_m > 1]
    stddevs = [pref_stddev(p.mx.preferences) for p in multi]
    ttls = [p.mx.min_ttl for p in analyzed if p.mx.min_ttl is not None]

    # Hosting
    hosted = [p for p in analyzed if p.flags.hosting]
    providers = sorted({name for p in analyzed for name in p.flags.hosting})
    crosstab: Dict[str, Dict[str, float]] = {}
    for group, labels in HOSTING_GROUPS.items():
        members = [p for p in analyzed if p.classification in labels]
        if members:
            share = _share(sum(1 for p in members if p.flags.hosting), len(members))
            crosstab[group] = {"hosting": share, "others": 1.0 - share}

    # SPF by configuration group
    spf_by_group: Dict[str, float] = {}
    for group, labels in (("Simple", SIMPLE_CLASSES), ("BLBFO", BLBFO_CLASSES)):
        members = [p for p in analyzed if p.classification in labels]
        if members:
            spf_by_group[group] = _share(sum(1 for p in members if p.flags.has_spf), len(members))

    rank_medians, kw = _rank_statistics(analyzed)

    def flag_share(name: str) -> float:
        return _share(sum(1 for p in analyzed if getattr(p.flags, name)), k)

    return CorpusSummary(
        k_q=k_q,
        k_w=k_nomx + k_errored,
        k_nomx=k_nomx,
        k_errored=k_errored,
        k_nullmx=k_nullmx,
        k=k,
        class_counts=class_counts,
        class_shares=class_shares,
        simple_share=_share(n_simple, k),
        blbfo_share=_share(n_blbfo, k),
        inferred_labels=list(INFERRED_LABELS),
        mx_count_hist=histogram(n_m, count_edges(n_m, 1, MX_COUNT_CAP)),
        a_count_hist=histogram(n_a, count_edges(n_a, 0, ADDRESS_COUNT_CAP)),
        aaaa_count_hist=histogram(n_abar, count_edges(n_abar, 0, ADDRESS_COUNT_CAP)),
        corr_mx_a=_optional(pearson, n_m, n_a),
        corr_mx_aaaa=_optional(pearson, n_m, n_abar),
        single_a_share=_share(sum(1 for v in n_a if v == 1), k),
        ipv6_share=flag_share("has_ipv6"),
        pref_stddev_hist=histogram(stddevs, stddev_edges(stddevs)),
        equal_pref_share=_share(sum(1 for s in stddevs if s == 0.0), len(stddevs)) if stddevs else None,
        ttl_hist=histogram(ttls, TTL_BIN_EDGES),
        ttl_below_2000_share=_share(sum(1 for t in ttls if t < 2000), len(ttls)) if ttls else None,
        hosting_share=_share(len(hosted), k),
        hosting_provider_shares={
            name: _share(sum(1 for p in analyzed if name in p.flags.hosting), k) for name in providers
        },
        hosting_crosstab=crosstab,
        rank_medians=rank_medians,
        kruskal_wallis=kw,
        spf_share=flag_share("has_spf"),
        spf_strict_share=flag_share("spf_strict"),
        spf_deny_all_share=flag_share("spf_deny_all"),
        spf_share_by_group=spf_by_group,
        nxdomain_exchanger_share=flag_share("has_nxdomain_exchanger"),
        private_v4_count=sum(1 for p in analyzed if p.flags.has_private_or_local_v4),
        private_v6_count=sum(1 for p in analyzed if p.flags.has_private_or_local_v6),
        missing_ptr_v4_share=flag_share("has_missing_ptr_v4"),
        missing_ptr_v6_share=flag_share("has_missing_ptr_v6"),
        duplicate_address_share=flag_share("has_duplicate_addresses"),
        cname_exchanger_share=flag_share("has_cname_exchanger"),
    )
