"""
Tests for the MTA selection simulator.
"""

import json
from collections import Counter

import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from app.core.exceptions import ParseError
from app.schemas.simulation import ClientPolicy, PoolEntry, RoundRobinState, ServerPolicy, ServerPool
from app.services.simulator import load_pool, mta_select, round_robin_answer, run_trials
from tests.conftest import FIXTURE_DIR


def _pool(*entries):
    return ServerPool(entries=tuple(
        PoolEntry(exchanger=name, preference=preference, addresses=tuple(addresses))
        for name, preference, addresses in entries
    ))


@pytest.fixture
def hybrid_pool():
    return _pool(
        ("mx1.domain.tld", 20, ["192.0.2.1"]),
        ("mx2.domain.tld", 10, ["192.0.2.2", "192.0.2.3"]),
    )


class TestRoundRobin:
    """Test suite for round_robin_answer."""

    def test_rotation_sequence(self):
        state = RoundRobinState(order=("A", "B", "C"))
        answers = []
        for _ in range(3):
            answer, state = round_robin_answer(state)
            answers.append(answer)
        assert answers == [["A", "B", "C"], ["B", "C", "A"], ["C", "A", "B"]]

    def test_cycle_returns_to_original(self):
        state = RoundRobinState(order=("A", "B", "C", "D"))
        for _ in range(4):
            _, state = round_robin_answer(state)
        assert state.order == ("A", "B", "C", "D")
        assert state.rotation_index == 0

    def test_state_is_immutable(self):
        state = RoundRobinState(order=("A", "B"))
        with pytest.raises(ValidationError):
            state.rotation_index = 1

    def test_single_address(self):
        state = RoundRobinState(order=("A",))
        for _ in range(5):
            answer, state = round_robin_answer(state)
            assert answer == ["A"]


class TestMtaSelect:
    """Test suite for mta_select."""

    def test_lower_preference_first(self, hybrid_pool):
        for seed in range(100):
            assert mta_select(hybrid_pool, seed)[0][0] == "mx2.domain.tld"

    def test_permutation_of_pool(self, hybrid_pool):
        preference = {e.exchanger: e.preference for e in hybrid_pool.entries}
        for seed in range(20):
            candidates = mta_select(hybrid_pool, seed)
            assert Counter(candidates) == Counter(hybrid_pool.pairs())
            prefs = [preference[name] for name, _ in candidates]
            assert prefs == sorted(prefs)

    def test_addresses_keep_served_order(self, hybrid_pool):
        candidates = mta_select(hybrid_pool, 0)
        assert candidates[:2] == [("mx2.domain.tld", "192.0.2.2"), ("mx2.domain.tld", "192.0.2.3")]

    def test_equal_preference_tie_break_is_fair(self):
        pool = _pool(("a.tld", 10, ["192.0.2.1"]), ("b.tld", 10, ["192.0.2.2"]))
        first = Counter(mta_select(pool, seed)[0][0] for seed in range(10_000))
        assert 4600 <= first["a.tld"] <= 5400
        assert first["a.tld"] + first["b.tld"] == 10_000

    def test_seed_reproducible(self):
        pool = _pool(*[(f"mx{i}.tld", 10, [f"192.0.2.{i + 1}"]) for i in range(5)])
        assert mta_select(pool, 42) == mta_select(pool, 42)


class TestRunTrials:
    """Test suite for run_trials."""

    def test_single_exchanger_alternates(self):
        pool = _pool(("mx.domain.tld", 10, ["192.0.2.1", "192.0.2.2"]))
        report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 10_000, seed=1)
        assert report.selection_counts == {"192.0.2.1": 5000, "192.0.2.2": 5000}
        assert report.failed_deliveries == 0

    def test_equal_preference_shares_are_uniform(self):
        pool = _pool(*[(f"mx{i}.tld", 10, [f"192.0.2.{i + 1}"]) for i in range(4)])
        report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 100_000, seed=2024)
        observed = [report.exchanger_counts[e.exchanger] for e in pool.entries]
        assert chisquare(observed).pvalue > 0.001
        for entry in pool.entries:
            assert report.share(entry.exchanger) == pytest.approx(0.25, abs=0.01)

    def test_repeated_exchanger_rotates_once_per_trial(self):
        pool = _pool(
            ("mx.a.tld", 10, ["192.0.2.1", "192.0.2.2"]),
            ("mx.a.tld", 20, ["192.0.2.1", "192.0.2.2"]),
        )
        report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 1000, seed=0)
        assert report.selection_counts == {"192.0.2.1": 500, "192.0.2.2": 500}
        assert report.exchanger_counts == {"mx.a.tld": 1000}

    def test_repeated_exchanger_random_client(self):
        pool = _pool(
            ("mx.a.tld", 10, ["192.0.2.1", "192.0.2.2"]),
            ("mx.a.tld", 20, ["192.0.2.1", "192.0.2.2"]),
        )
        report = run_trials(pool, ClientPolicy.RANDOM_ADDRESS, 10_000, seed=8)
        assert 4600 <= report.selection_counts["192.0.2.1"] <= 5400
        assert report.failed_deliveries == 0

    def test_unavailable_addresses_canonicalized(self):
        pool = _pool(("mx.domain.tld", 10, ["2001:db8::1", "192.0.2.1"]))
        report = run_trials(pool.with_unavailable(["2001:DB8:0::1"]), ClientPolicy.FIRST_ADDRESS, 100, seed=1)
        assert report.selection_counts == {"2001:db8::1": 0, "192.0.2.1": 100}

    def test_all_unavailable(self, hybrid_pool):
        pool = hybrid_pool.with_unavailable(["192.0.2.1", "192.0.2.2", "192.0.2.3"])
        report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 500, seed=3)
        assert report.failed_deliveries == 500
        assert sum(report.selection_counts.values()) == 0

    def test_fail_over_to_backup(self, hybrid_pool):
        pool = hybrid_pool.with_unavailable(["192.0.2.2", "192.0.2.3"])
        report = run_trials(pool, ClientPolicy.FIRST_ADDRESS, 1000, seed=4)
        assert report.exchanger_counts == {"mx1.domain.tld": 1000, "mx2.domain.tld": 0}

    def test_lower_preference_dominates(self, hybrid_pool):
        for seed in range(10):
            report = run_trials(hybrid_pool, ClientPolicy.RANDOM_ADDRESS, 200, seed=seed)
            assert report.share("mx2.domain.tld") == 1.0

    def test_never_fails_when_all_available(self, hybrid_pool):
        for policy in ServerPolicy:
            report = run_trials(hybrid_pool, ClientPolicy.FIRST_ADDRESS, 300, seed=5, server_policy=policy)
            assert report.failed_deliveries == 0

    def test_random_client_spreads_load(self):
        pool = _pool(("mx.domain.tld", 10, ["192.0.2.1", "192.0.2.2"]))
        report = run_trials(pool, ClientPolicy.RANDOM_ADDRESS, 10_000, seed=6)
        assert 4600 <= report.selection_counts["192.0.2.1"] <= 5400

    def test_reproducible(self, hybrid_pool):
        first = run_trials(hybrid_pool, ClientPolicy.RANDOM_ADDRESS, 1000, seed=9, server_policy=ServerPolicy.SHUFFLE)
        second = run_trials(hybrid_pool, ClientPolicy.RANDOM_ADDRESS, 1000, seed=9, server_policy=ServerPolicy.SHUFFLE)
        assert first.model_dump_json() == second.model_dump_json()

    def test_invalid_trials(self, hybrid_pool):
        with pytest.raises(ValueError):
            run_trials(hybrid_pool, ClientPolicy.FIRST_ADDRESS, 0, seed=0)


class TestLoadPool:
    """Test suite for load_pool."""

    def test_native_file(self, tmp_path):
        path = tmp_path / "pool.json"
        path.write_text(json.dumps({"entries": [
            {"exchanger": "mx.domain.tld", "preference": 10, "addresses": ["192.0.2.1"]},
        ]}))
        pool = load_pool(path)
        assert pool.entries[0].available == (True,)

    def test_invalid_native_file(self, tmp_path):
        path = tmp_path / "pool.json"
        path.write_text(json.dumps({"entries": []}))
        with pytest.raises(ParseError):
            load_pool(path)

    def test_from_fixture(self):
        pool = load_pool(FIXTURE_DIR / "sample.json", "Example.Test")
        assert [(e.exchanger, e.preference, len(e.addresses)) for e in pool.entries] == [
            ("mx1.example.test", 10, 3),
            ("mx2.example.test", 20, 1),
        ]

    def test_repeated_exchanger_must_share_addresses(self):
        with pytest.raises(ValidationError):
            _pool(("mx.a.tld", 10, ["192.0.2.1"]), ("mx.a.tld", 20, ["192.0.2.2"]))

    def test_fixture_requires_domain(self):
        with pytest.raises(ValueError):
            load_pool(FIXTURE_DIR / "sample.json")
