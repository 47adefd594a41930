"""Vectorized filter evaluation over a columnar corpus snapshot.

Matching semantics:

* conjunction of all atoms; the empty expression matches every sensor
* '=' on a numeric property means |value - threshold| <= EQUALITY_EPSILON
  (native units); all other operators are exact IEEE comparisons
* interval membership is closed on both ends
* a sensor lacking any property referenced by the expression cannot match,
  and the per-query diagnostics count how many sensors that excluded
* results come back in ascending uid order
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from ..core import PropertyRegistry, SensorDescription
from ..corpus import Corpus
from ..errors import UnknownProperty
from .ast import EQUALITY_EPSILON, CategoricalEq, Comparison, FilterExpr, RangeUnion


@dataclass(frozen=True)
class EvalDiagnostics:
    matched: int
    excluded_missing_property: int


def _comparison_mask(col: np.ndarray, op: str, threshold: float) -> np.ndarray:
    if op == "<":
        return col < threshold
    if op == ">":
        return col > threshold
    if op == "<=":
        return col <= threshold
    if op == ">=":
        return col >= threshold
    # '=' with epsilon tolerance; NaN propagates to False like the others
    return np.abs(col - threshold) <= EQUALITY_EPSILON


def _atom_mask(atom, corpus: Corpus) -> np.ndarray:
    if isinstance(atom, CategoricalEq):
        column = corpus.sensor_types if atom.field == "sensor_type" else corpus.regions
        return column == atom.value
    col = corpus.columns.get(atom.key)
    if col is None:
        col = np.full(len(corpus), np.nan)
    if isinstance(atom, Comparison):
        return _comparison_mask(col, atom.op, atom.threshold)
    mask = np.zeros(len(corpus), dtype=bool)
    for lo, hi in atom.intervals:
        mask |= (col >= lo) & (col <= hi)
    return mask


def evaluate_indices(expr: FilterExpr,
                     corpus: Corpus) -> tuple[np.ndarray, EvalDiagnostics]:
    """Matching row indices (ascending uid) plus exclusion diagnostics."""
    keys = expr.property_keys()
    for key in keys:
        if key not in corpus.registry:
            raise UnknownProperty(key)
    mask = np.ones(len(corpus), dtype=bool)
    for atom in expr.conjuncts:
        mask &= _atom_mask(atom, corpus)
    missing = np.zeros(len(corpus), dtype=bool)
    for key in keys:
        col = corpus.columns.get(key)
        missing |= np.isnan(col) if col is not None else True
    return np.flatnonzero(mask), EvalDiagnostics(
        matched=int(mask.sum()),
        excluded_missing_property=int(missing.sum()),
    )


def _as_corpus(corpus: Union[Corpus, Iterable[SensorDescription]],
               registry: PropertyRegistry | None) -> Corpus:
    if isinstance(corpus, Corpus):
        return corpus
    if registry is None:
        raise ValueError("a registry is required when passing raw sensors")
    return Corpus.from_sensors(corpus, registry)


def evaluate(expr: FilterExpr, corpus: Union[Corpus, Iterable[SensorDescription]],
             registry: PropertyRegistry | None = None) -> list[SensorDescription]:
    """Sensors satisfying every conjunct, in ascending uid order."""
    snapshot = _as_corpus(corpus, registry)
    indices, _ = evaluate_indices(expr, snapshot)
    return [snapshot.sensor_at(i) for i in indices]


def count_matches(expr: FilterExpr, corpus: Union[Corpus, Iterable[SensorDescription]],
                  registry: PropertyRegistry | None = None) -> int:
    """Match count without materializing the sensor list."""
    snapshot = _as_corpus(corpus, registry)
    _, diagnostics = evaluate_indices(expr, snapshot)
    return diagnostics.matched
