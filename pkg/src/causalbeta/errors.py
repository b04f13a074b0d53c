"""Exception types shared across the package.

Every error carries a stable machine-readable ``kind`` tag (snake_case) so
batch callers and the CLI can dispatch on it without parsing messages.
"""

from __future__ import annotations


class CausalBetaError(Exception):
    """Base class for all package errors."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind

    def __str__(self) -> str:
        return f"[{self.kind}] {super().__str__()}"


class ValidationError(CausalBetaError):
    """Caller violated an input contract (bad parameters, invalid graph)."""


class RegressionError(CausalBetaError):
    """A regression could not be estimated (rank deficiency, too few rows)."""


class DataError(CausalBetaError):
    """Malformed or inconsistent input data (CSV contracts, alignment)."""


class DiagnosticsError(CausalBetaError):
    """A diagnostic section could not be computed on the given inputs."""
