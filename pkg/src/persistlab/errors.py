"""Exception types shared across the package.

Every failure carries a short machine-readable ``code`` (e.g. ``NOT_STOCHASTIC``)
so callers and the CLI can react without parsing prose.
"""

from __future__ import annotations


class PersistLabError(Exception):
    """Base class for all package errors."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


class ValidationError(PersistLabError, ValueError):
    """A model, configuration, or argument violates its contract.

    Codes: NOT_STOCHASTIC, NEGATIVE_ENTRY, REDUCIBLE, ZERO_MASS_STATE,
    MEAN_NOT_ZERO, UNKNOWN_PRESET, NON_INTEGER_G, CAP_TOO_LOW,
    EMPTY_WINDOW, NONPOSITIVE_VALUE, NOT_SKIP_FREE, RING_TOO_SMALL.
    """


class ComputationError(PersistLabError, RuntimeError):
    """A computation cannot be carried out as requested.

    Codes: SINGULAR, SINGULAR_SYSTEM, DEFECTIVE_MATRIX, NO_CONVERGENCE,
    TOO_LARGE.
    """


class ParseError(PersistLabError, ValueError):
    """A chain-spec file is malformed. Carries the offending line number."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__("PARSE_ERROR", f"line {line}: {message}")
