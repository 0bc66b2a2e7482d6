"""Services package."""

from .backends import FixtureBackend, QueryMemo, load_fixture_backend
from .classifier import audit, classify
from .resolver import ResolverPolicy, resolve_domain, resolve_many
from .simulator import mta_select, run_trials
from .stats import summarize

__all__ = [
    "FixtureBackend",
    "QueryMemo",
    "load_fixture_backend",
    "audit",
    "classify",
    "ResolverPolicy",
    "resolve_domain",
    "resolve_many",
    "mta_select",
    "run_trials",
    "summarize",
]
