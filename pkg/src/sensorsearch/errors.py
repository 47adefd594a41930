"""Exception types shared across the package.

Every error raised intentionally by this package derives from
SensorSearchError so callers can catch the family in one clause. The CLI maps
subfamilies onto exit codes (user/config errors, data errors, internal
faults); the HTTP service maps them onto status codes.
"""

from __future__ import annotations


class SensorSearchError(Exception):
    """Base class for all errors raised by this package."""


class UnknownProperty(SensorSearchError):
    """A property key is not present in the registry."""

    def __init__(self, key: str):
        super().__init__(f"unknown property: {key!r}")
        self.key = key


class OutOfBounds(SensorSearchError):
    """A value falls outside a property's observed bounds.

    Signals a missed register_observation() call: values must be observed
    before they can be normalized.
    """

    def __init__(self, key: str, value: float, lo: float | None, hi: float | None):
        if lo is None:
            detail = "no observations recorded yet"
        else:
            detail = f"observed bounds [{lo}, {hi}]"
        super().__init__(f"value {value} for property {key!r} is outside bounds: {detail}")
        self.key = key
        self.value = value
        self.lo = lo
        self.hi = hi


class MissingProperty(SensorSearchError):
    """A sensor lacks a property required by the current operation."""

    def __init__(self, key: str, uid: str):
        super().__init__(f"sensor {uid!r} has no value for property {key!r}")
        self.key = key
        self.uid = uid


class ParseError(SensorSearchError):
    """Filter text failed to parse; carries position and expected tokens."""

    def __init__(self, message: str, line: int, column: int,
                 expected: frozenset[str] = frozenset()):
        loc = f"line {line}, column {column}"
        if expected:
            message = f"{message} (expected {', '.join(sorted(expected))})"
        super().__init__(f"{message} at {loc}")
        self.line = line
        self.column = column
        self.expected = expected


class InvalidFilter(SensorSearchError):
    """A structured filter document violates the filter model's invariants."""


class EmptyPriority(SensorSearchError):
    """A priority specification includes no properties."""

    def __init__(self) -> None:
        super().__init__("priority specification has no included entries")


class KeyMismatch(SensorSearchError):
    """Two keyed collections that must align do not."""

    def __init__(self, message: str, difference: frozenset[str] = frozenset()):
        if difference:
            message = f"{message}: {', '.join(sorted(difference))}"
        super().__init__(message)
        self.difference = difference


class InvalidK(SensorSearchError):
    """Sampling interval k is incompatible with the requested result size."""

    def __init__(self, k: int, n: int):
        super().__init__(f"sampling interval k={k} must be a positive integer below n={n}")
        self.k = k
        self.n = n


class SimFault(SensorSearchError):
    """The simulated cluster is misconfigured or a hop is unreachable."""

    def __init__(self, message: str, hop: int | None = None):
        if hop is not None:
            message = f"{message} (hop {hop})"
        super().__init__(message)
        self.hop = hop


class ConfigError(SensorSearchError):
    """A generator or topology configuration is invalid."""


class LoadError(SensorSearchError):
    """A persisted corpus file is malformed; carries the offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidRequest(SensorSearchError):
    """A search request document fails validation."""


class NoCorpus(SensorSearchError):
    """No corpus snapshot has been loaded yet."""

    def __init__(self) -> None:
        super().__init__("no corpus loaded")
