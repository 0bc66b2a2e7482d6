"""
MTA Selection Simulator

Models how a sending MTA picks a receiving exchanger and address:

- The client orders exchangers by ascending preference and randomizes the
  order inside an equal-preference group
- The authoritative server answers each address query either rotated
  (round-robin) or freshly shuffled
- The client takes the first served address, or a random one, and falls
  back through the remaining candidates when an address is down

Runs are single-threaded and bit-reproducible for a fixed seed.

Author: Development Team
Version: 1.0.0
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import ParseError
from app.core.utils import canonicalize
from app.schemas.simulation import (
    ClientPolicy,
    PoolEntry,
    RoundRobinState,
    ServerPolicy,
    ServerPool,
    TrialReport,
)
from app.services.backends import FixtureBackend, RRType, load_fixture_backend
from app.services.resolver import parse_mx_rdata

logger = logging.getLogger(__name__)

Candidate = Tuple[str, str]


def round_robin_answer(state: RoundRobinState) -> Tuple[List[str], RoundRobinState]:
    """
    Serve the current order, then rotate left by one for the next query.

    Example:
        >>> answer, state = round_robin_answer(RoundRobinState(order=("a", "b", "c")))
        >>> answer, state.order
        (['a', 'b', 'c'], ('b', 'c', 'a'))
    """
    order = list(state.order)
    if not order:
        return order, state
    rotated = tuple(order[1:] + order[:1])
    return order, RoundRobinState(order=rotated, rotation_index=(state.rotation_index + 1) % len(order))


def _select(
    pool: ServerPool,
    rng: np.random.Generator,
    answers: Optional[Mapping[str, Sequence[str]]] = None,
) -> List[List[Candidate]]:
    """Candidate blocks, one per pool entry, by preference; equal-preference entries are shuffled."""
    groups: Dict[int, List[PoolEntry]] = {}
    for entry in pool.entries:
        groups.setdefault(entry.preference, []).append(entry)

    blocks: List[List[Candidate]] = []
    for preference in sorted(groups):
        group = groups[preference]
        order = rng.permutation(len(group)) if len(group) > 1 else range(1)
        for index in order:
            entry = group[int(index)]
            served = answers[entry.exchanger] if answers is not None else entry.addresses
            blocks.append([(entry.exchanger, a) for a in served])
    return blocks


def mta_select(pool: ServerPool, rng_seed: int) -> List[Candidate]:
    """
    Client-side candidate list for one delivery attempt.

    Candidates come in ascending preference; within an equal-preference group
    the exchanger order is a uniformly random permutation driven by the seed,
    and each exchanger's addresses keep their served order.

    Args:
        pool: Exchangers with their addresses
        rng_seed: Seed of the tie-break permutation

    Returns:
        Ordered (exchanger, address) pairs covering the whole pool
    """
    return [c for block in _select(pool, np.random.default_rng(rng_seed)) for c in block]


def _pick(blocks: List[List[Candidate]], client_policy: ClientPolicy, rng: np.random.Generator) -> List[Candidate]:
    """Apply the client policy inside each exchanger's address block."""
    if client_policy == ClientPolicy.FIRST_ADDRESS:
        return [c for block in blocks for c in block]

    picked: List[Candidate] = []
    for block in blocks:
        first = int(rng.integers(len(block))) if len(block) > 1 else 0
        picked.append(block[first])
        picked.extend(c for i, c in enumerate(block) if i != first)
    return picked


def run_trials(
    pool: ServerPool,
    client_policy: ClientPolicy,
    n_trials: int,
    seed: int,
    server_policy: ServerPolicy = ServerPolicy.ROTATE,
) -> TrialReport:
    """
    Simulate ``n_trials`` deliveries to a pool.

    Each trial queries every distinct exchanger's addresses once (rotating or
    shuffling per ``server_policy``), orders the exchangers as an MTA would,
    applies the client policy and walks the candidates until an available
    address is found.

    Returns:
        TrialReport with per-address and per-exchanger delivery counts

    Example:
        >>> report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 10000, seed=7)
        >>> report.selection_counts
        {'192.0.2.1': 5000, '192.0.2.2': 5000}
    """
    if n_trials < 1:
        raise ValueError("n_trials must be positive")

    rng = np.random.default_rng(seed)
    rrsets = pool.addresses_by_exchanger()
    states: Dict[str, RoundRobinState] = {name: RoundRobinState(order=rrset) for name, rrset in rrsets.items()}
    availability: Dict[Candidate, bool] = {
        (e.exchanger, a): ok for e in pool.entries for a, ok in zip(e.addresses, e.available)
    }

    selection_counts: Dict[str, int] = {a: 0 for _, a in pool.pairs()}
    exchanger_counts: Dict[str, int] = {e.exchanger: 0 for e in pool.entries}
    failed = 0

    logger.info(
        f"Simulating {n_trials} trials over {len(pool.entries)} exchangers "
        f"(client={client_policy.value}, server={server_policy.value}, seed={seed})"
    )

    for _ in range(n_trials):
        # One answer per distinct exchanger, shared by every entry listing it
        answers: Dict[str, List[str]] = {}
        for name, rrset in rrsets.items():
            if server_policy == ServerPolicy.ROTATE:
                answers[name], states[name] = round_robin_answer(states[name])
            else:
                answers[name] = [rrset[int(i)] for i in rng.permutation(len(rrset))]

        candidates = _pick(_select(pool, rng, answers), client_policy, rng)
        delivered = next((c for c in candidates if availability[c]), None)

        if delivered is None:
            failed += 1
            continue
        exchanger, address = delivered
        selection_counts[address] += 1
        exchanger_counts[exchanger] += 1

    if failed:
        logger.info(f"{failed} of {n_trials} deliveries failed")

    return TrialReport(
        trials=n_trials,
        seed=seed,
        client_policy=client_policy,
        server_policy=server_policy,
        selection_counts=selection_counts,
        exchanger_counts=exchanger_counts,
        failed_deliveries=failed,
    )


def pool_from_fixture(backend: FixtureBackend, domain: str) -> ServerPool:
    """
    Build a pool from a domain's MX RRset and its exchangers' A/AAAA RRsets.

    Raises:
        ValueError: if the domain has no usable exchanger
    """
    mx = backend.answer(domain, RRType.MX)
    entries: List[PoolEntry] = []
    for text, ttl in mx.records:
        record = parse_mx_rdata(text, ttl)
        addresses = backend.answer(record.exchanger, RRType.A).rdata + backend.answer(record.exchanger, RRType.AAAA).rdata
        if not addresses:
            logger.warning(f"{domain}: exchanger {record.exchanger} has no addresses; left out of the pool")
            continue
        entries.append(PoolEntry(exchanger=record.exchanger, preference=record.preference, addresses=tuple(addresses)))

    if not entries:
        raise ValueError(f"{domain}: no exchanger with addresses in fixture")
    return ServerPool(entries=tuple(entries))


def load_pool(path: Union[str, Path], domain: Optional[str] = None) -> ServerPool:
    """
    Load a pool from a native pool file or from a resolver fixture.

    A native file is an object with an "entries" list. Anything else is read
    as resolver fixtures, and ``domain`` selects the MX RRset to use.

    Raises:
        ParseError: if the native file does not validate
        FixtureParseError: if the fixture does not parse
        ValueError: if a fixture is given without a domain
    """
    path = Path(path)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.lineno, e.msg) from e

        if isinstance(data, dict) and "entries" in data:
            try:
                return ServerPool.model_validate(data)
            except ValidationError as e:
                raise ParseError(path, 1, e.errors()[0]["msg"]) from e

    if domain is None:
        raise ValueError(f"{path} is a resolver fixture; a domain is required")
    return pool_from_fixture(load_fixture_backend(path), canonicalize(domain))
