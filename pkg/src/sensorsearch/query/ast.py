"""Filter expression model.

A filter is a conjunction of atoms. Three atom kinds exist:

* CategoricalEq: exact match on a categorical field (sensor type or region)
* Comparison: one relational operator against a numeric property
* RangeUnion: membership in a union of closed intervals of one property

OR exists only inside a RangeUnion (between intervals of a single property),
so the whole expression stays a flat conjunction. An expression holds at most
one RangeUnion per property.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from ..errors import InvalidFilter

# external field names accepted by the DSL and structured documents
CATEGORICAL_FIELDS: Mapping[str, str] = {
    "type": "sensor_type",
    "sensor_type": "sensor_type",
    "region": "region",
}
COMPARISON_OPS = ("<", ">", "<=", ">=", "=")

# tolerance for '=' on real-valued properties, in native units
EQUALITY_EPSILON = 1e-9


def format_number(value: float) -> str:
    """Render a float so that re-parsing reproduces the exact value."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _quote_if_needed(text: str) -> str:
    if text and all(ch.isalnum() or ch == "_" for ch in text):
        return text
    return '"' + text + '"'


@dataclass(frozen=True)
class CategoricalEq:
    field: str   # "sensor_type" | "region"
    value: str

    def __post_init__(self) -> None:
        if self.field not in ("sensor_type", "region"):
            raise InvalidFilter(f"not a categorical field: {self.field!r}")

    def to_text(self) -> str:
        alias = "type" if self.field == "sensor_type" else self.field
        return f"{alias} = {_quote_if_needed(self.value)}"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "categorical", "field": self.field, "value": self.value}


@dataclass(frozen=True)
class Comparison:
    key: str
    op: str
    threshold: float

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise InvalidFilter(f"unknown comparison operator: {self.op!r}")

    def to_text(self) -> str:
        return f"{self.key} {self.op} {format_number(self.threshold)}"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "comparison", "key": self.key, "op": self.op,
                "threshold": self.threshold}


@dataclass(frozen=True)
class RangeUnion:
    key: str
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise InvalidFilter(f"range union for {self.key!r} has no intervals")
        for lo, hi in self.intervals:
            if lo > hi:
                raise InvalidFilter(
                    f"empty interval [{lo}, {hi}] for property {self.key!r}")

    def to_text(self) -> str:
        parts = [f"{self.key} in [{format_number(lo)}, {format_number(hi)}]"
                 for lo, hi in self.intervals]
        if len(parts) == 1:
            return parts[0]
        return "(" + " or ".join(parts) + ")"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "range_union", "key": self.key,
                "intervals": [[lo, hi] for lo, hi in self.intervals]}


Atom = Union[CategoricalEq, Comparison, RangeUnion]


@dataclass(frozen=True)
class FilterExpr:
    """Conjunction of atoms; empty conjunct tuple matches every sensor."""

    conjuncts: tuple[Atom, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        seen_unions: set[str] = set()
        for atom in self.conjuncts:
            if isinstance(atom, RangeUnion):
                if atom.key in seen_unions:
                    raise InvalidFilter(
                        f"property {atom.key!r} has more than one range union")
                seen_unions.add(atom.key)

    def property_keys(self) -> tuple[str, ...]:
        """Numeric property keys referenced by the expression, in order."""
        keys: list[str] = []
        for atom in self.conjuncts:
            if isinstance(atom, (Comparison, RangeUnion)) and atom.key not in keys:
                keys.append(atom.key)
        return tuple(keys)

    def to_text(self) -> str:
        return " and ".join(atom.to_text() for atom in self.conjuncts)

    def to_dict(self) -> dict[str, Any]:
        return {"conjuncts": [atom.to_dict() for atom in self.conjuncts]}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "FilterExpr":
        if not isinstance(doc, Mapping) or "conjuncts" not in doc:
            raise InvalidFilter("filter document must be an object with 'conjuncts'")
        atoms: list[Atom] = []
        for entry in doc["conjuncts"]:
            try:
                kind = entry["kind"]
                if kind == "categorical":
                    raw_field = entry["field"]
                    if raw_field not in CATEGORICAL_FIELDS:
                        raise InvalidFilter(f"not a categorical field: {raw_field!r}")
                    atoms.append(CategoricalEq(CATEGORICAL_FIELDS[raw_field],
                                               str(entry["value"])))
                elif kind == "comparison":
                    atoms.append(Comparison(str(entry["key"]), str(entry["op"]),
                                            float(entry["threshold"])))
                elif kind == "range_union":
                    intervals = tuple((float(lo), float(hi))
                                      for lo, hi in entry["intervals"])
                    atoms.append(RangeUnion(str(entry["key"]), intervals))
                else:
                    raise InvalidFilter(f"unknown atom kind: {kind!r}")
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidFilter(f"malformed filter atom: {entry!r}") from exc
        return cls(tuple(atoms))
