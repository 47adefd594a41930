"""Domain model: sensors, context properties, and dynamic normalization.

Property bounds are learned, not configured. Every value routed through
``register_observation`` widens the property's observed interval, and
``normalize`` maps a native-unit value onto [0, 1] against the current
interval. Bounds only ever widen, so each property carries a version counter
that downstream caches use for invalidation.

A single unit per property is assumed; no unit conversion happens anywhere in
the package. Values for one property must arrive in that property's unit.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from enum import Enum
from importlib.resources import files
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import MissingProperty, OutOfBounds, UnknownProperty

CANONICAL_DATA = "context_properties_v1.jsonl"


class Polarity(Enum):
    """Whether larger native values are preferable for a property."""

    HIGHER_IS_BETTER = "higher"
    LOWER_IS_BETTER = "lower"

    @classmethod
    def from_str(cls, text: str) -> "Polarity":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown polarity: {text!r}")


@dataclass(frozen=True, slots=True)
class PropertyDef:
    """One context property: key, unit of measure, polarity, observed bounds.

    observed_min/observed_max are None until the first observation arrives.
    """

    key: str
    unit: str
    polarity: Polarity
    observed_min: float | None = None
    observed_max: float | None = None

    def __post_init__(self) -> None:
        lo, hi = self.observed_min, self.observed_max
        if (lo is None) != (hi is None):
            raise ValueError("observed_min and observed_max must be set together")
        if lo is not None and lo > hi:
            raise ValueError(f"observed_min {lo} exceeds observed_max {hi}")


@dataclass(frozen=True, slots=True)
class SensorDescription:
    """A sensor: stable uid, type, deployment region, native property values.

    raw_values may be partial; operations that need a property a sensor lacks
    raise MissingProperty naming both the key and the uid.
    """

    uid: str
    sensor_type: str
    region: str
    raw_values: Mapping[str, float]


@dataclass(frozen=True, slots=True)
class NormalizedVector:
    """Per-property values mapped onto [0, 1]."""

    values: Mapping[str, float]

    def __post_init__(self) -> None:
        for key, value in self.values.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"normalized value for {key!r} outside [0, 1]: {value}")


class PropertyRegistry:
    """Catalogue of property definitions with widening observed bounds.

    Thread model: definitions are frozen and replaced atomically, so readers
    never see a torn update; writes are serialized by a lock so concurrent
    observations cannot lose a widening.
    """

    def __init__(self, props: Iterable[PropertyDef] = ()):
        self._defs: dict[str, PropertyDef] = {}
        self._versions: dict[str, int] = {}
        self._lock = threading.Lock()
        for prop in props:
            self.register(prop)

    def register(self, prop: PropertyDef) -> None:
        with self._lock:
            if prop.key in self._defs:
                raise ValueError(f"property already registered: {prop.key!r}")
            self._defs[prop.key] = prop
            self._versions[prop.key] = 0

    def get(self, key: str) -> PropertyDef:
        try:
            return self._defs[key]
        except KeyError:
            raise UnknownProperty(key) from None

    def keys(self) -> tuple[str, ...]:
        return tuple(self._defs)

    def __contains__(self, key: str) -> bool:
        return key in self._defs

    def __iter__(self) -> Iterator[PropertyDef]:
        return iter(list(self._defs.values()))

    def __len__(self) -> int:
        return len(self._defs)

    def bounds_version(self, key: str) -> int:
        self.get(key)
        return self._versions[key]

    def register_observation(self, key: str, value: float) -> "PropertyRegistry":
        """Widen the property's bounds to cover value. Returns the registry."""
        value = float(value)
        with self._lock:
            prop = self._defs.get(key)
            if prop is None:
                raise UnknownProperty(key)
            lo, hi = prop.observed_min, prop.observed_max
            if lo is None:
                updated = replace(prop, observed_min=value, observed_max=value)
            elif value < lo:
                updated = replace(prop, observed_min=value)
            elif value > hi:
                updated = replace(prop, observed_max=value)
            else:
                return self
            self._defs[key] = updated
            self._versions[key] += 1
        return self

    def normalize(self, key: str, value: float) -> float:
        """Map a native-unit value onto [0, 1] against the observed bounds.

        Callers must have registered the value (or wider extremes) first;
        anything outside the current bounds raises OutOfBounds. A degenerate
        single-point domain maps to the ranking-neutral midpoint 0.5.
        """
        prop = self.get(key)
        lo, hi = prop.observed_min, prop.observed_max
        if lo is None or value < lo or value > hi:
            raise OutOfBounds(key, value, lo, hi)
        if hi == lo:
            return 0.5
        return (value - lo) / (hi - lo)

    def normalized_vector(self, sensor: SensorDescription,
                          keys: Sequence[str]) -> NormalizedVector:
        out: dict[str, float] = {}
        for key in keys:
            raw = sensor.raw_values.get(key)
            if raw is None:
                raise MissingProperty(key, sensor.uid)
            out[key] = self.normalize(key, raw)
        return NormalizedVector(out)


def register_observation(registry: PropertyRegistry, key: str,
                         value: float) -> PropertyRegistry:
    return registry.register_observation(key, value)


def normalize(registry: PropertyRegistry, key: str, value: float) -> float:
    return registry.normalize(key, value)


def normalized_vector(registry: PropertyRegistry, sensor: SensorDescription,
                      keys: Sequence[str]) -> NormalizedVector:
    return registry.normalized_vector(sensor, keys)


def canonical_registry() -> PropertyRegistry:
    """Load the shipped catalogue of thirty context properties."""
    text = files("sensorsearch").joinpath("data", CANONICAL_DATA).read_text(encoding="utf-8")
    registry = PropertyRegistry()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "schema" in record:
            if record.get("schema") != "context-properties" or record.get("version") != 1:
                raise ValueError(f"unsupported property catalogue header: {record}")
            continue
        registry.register(PropertyDef(
            key=record["key"],
            unit=record["unit"],
            polarity=Polarity.from_str(record["polarity"]),
        ))
    return registry
