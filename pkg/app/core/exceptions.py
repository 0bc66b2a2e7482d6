"""
Custom exceptions for the application.

Per-record DNS failures are never raised; they travel as QueryStatus values.
The classes here cover malformed input, broken fixtures and fatal transport
or configuration problems.
"""

from pathlib import Path
from typing import Union


class MxAuditError(Exception):
    """Base class for every error raised by mx-audit."""
    pass


class MalformedName(MxAuditError, ValueError):
    """Raised when a string cannot be canonicalized into a domain name."""
    pass


class BackendUnavailable(MxAuditError):
    """Raised when the query transport is completely down."""
    pass


class _LocatedError(MxAuditError):
    """Error tied to a position in an input file."""

    def __init__(self, path: Union[str, Path], line: int, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class FixtureParseError(_LocatedError):
    """Raised when a resolver fixture file cannot be parsed."""
    pass


class ParseError(_LocatedError):
    """Raised when a domain list, rule, pool or profiles file cannot be parsed."""
    pass


class DegenerateInput(MxAuditError, ValueError):
    """Raised when a statistic is undefined for the given input."""
    pass


class EmptyCorpus(MxAuditError):
    """Raised when there is nothing to summarize."""
    pass


class ConfigError(MxAuditError):
    """Raised when the run configuration is inconsistent."""
    pass
