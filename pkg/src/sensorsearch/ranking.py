"""Priority weighting, ideal-distance scoring, selection, heuristic pruning.

The score of a sensor is the weighted Euclidean distance between its
normalized property vector and an ideal point in the same space:

    score = sqrt(sum_i w_i * (ideal_i - value_i)^2)

Lower is better. Weights come from user priority sliders: each included
slider divided by the range (max - min) of the included sliders; when all
included sliders are equal the range degenerates and every weight is 1.
Distance terms accumulate in priority-entry order, which keeps scores
bit-identical across the list-based and columnar code paths.

The heuristic pruner cuts the candidate pool before scoring. With C
candidates and n requested, removable = C - n. Properties are visited in
descending weight share q_i = w_i / sum(w); each pass sorts the surviving
pool best-first by that property alone (polarity-adjusted normalized value,
ties broken by ascending uid) and drops

    floor(removable * q_i * (100 - margin) / 100)

sensors from the bottom. Passes run sequentially on the shrinking pool. The
margin tempers how aggressive the cut is: margin 100 removes nothing, margin
0 removes the full removable budget. The pass budgets sum to at most
removable, so at least n candidates always survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import Polarity, PropertyRegistry, SensorDescription
from .errors import EmptyPriority, KeyMismatch, MissingProperty, OutOfBounds

# implements real-arithmetic floor for budgets whose float image lands dust
# below an integer (e.g. weight shares 40/30/20/10 % must yield exactly 40)
_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class PriorityEntry:
    key: str
    slider: float
    included: bool = True


@dataclass(frozen=True)
class PrioritySpec:
    """User priorities: slider positions on [1, scale] plus inclusion flags."""

    entries: tuple[PriorityEntry, ...]
    scale: float = 100.0

    def validate(self) -> None:
        if self.scale <= 1:
            raise ValueError(f"scale must exceed 1, got {self.scale}")
        seen = set()
        for entry in self.entries:
            if entry.key in seen:
                raise ValueError(f"duplicate priority key {entry.key!r}")
            seen.add(entry.key)
            if entry.included and not 1 <= entry.slider <= self.scale:
                raise ValueError(
                    f"slider for {entry.key!r} outside [1, {self.scale}]: {entry.slider}")
        if not any(entry.included for entry in self.entries):
            raise EmptyPriority()

    def included_entries(self) -> tuple[PriorityEntry, ...]:
        return tuple(entry for entry in self.entries if entry.included)


@dataclass(frozen=True)
class WeightVector:
    """Per-property weights, ordered like the priority entries they came from."""

    weights: Mapping[str, float]

    def keys(self) -> tuple[str, ...]:
        return tuple(self.weights)


@dataclass(frozen=True)
class IdealSensor:
    """Target point in normalized space; keys match the included priorities."""

    values: Mapping[str, float]

    def __post_init__(self) -> None:
        for key, value in self.values.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"ideal value for {key!r} outside [0, 1]: {value}")


@dataclass(frozen=True)
class RankedEntry:
    uid: str
    cpwi: float


@dataclass(frozen=True)
class RankedResult:
    entries: tuple[RankedEntry, ...]
    truncated_to: int

    def uids(self) -> tuple[str, ...]:
        return tuple(entry.uid for entry in self.entries)


def compute_weights(spec: PrioritySpec) -> WeightVector:
    """Convert slider positions to weights: slider / (max - min) of included.

    Degenerate range (all included sliders equal) yields weight 1 for every
    included property, so a flat panel means unweighted distance.
    """
    spec.validate()
    included = spec.included_entries()
    sliders = [entry.slider for entry in included]
    spread = max(sliders) - min(sliders)
    if spread == 0:
        return WeightVector({entry.key: 1.0 for entry in included})
    return WeightVector({entry.key: entry.slider / spread for entry in included})


def default_ideal(registry: PropertyRegistry, keys: Sequence[str]) -> IdealSensor:
    """Best-possible target: 1.0 where higher is better, 0.0 where lower is."""
    values = {}
    for key in keys:
        prop = registry.get(key)
        values[key] = 1.0 if prop.polarity is Polarity.HIGHER_IS_BETTER else 0.0
    return IdealSensor(values)


def ideal_from_native(registry: PropertyRegistry, native: Mapping[str, float],
                      keys: Sequence[str]) -> IdealSensor:
    """Ideal point from native-unit targets, defaulting to best-possible.

    Native values are registered as observations first (bounds widen to cover
    them), then normalized; keys without a native target keep the polarity
    default.
    """
    unknown = frozenset(native) - frozenset(keys)
    if unknown:
        raise KeyMismatch("ideal values for properties outside the priorities", unknown)
    values = dict(default_ideal(registry, keys).values)
    for key, target in native.items():
        registry.register_observation(key, target)
        values[key] = registry.normalize(key, target)
    return IdealSensor(values)


def cpwi(sensor_vec, ideal: IdealSensor, weights: WeightVector) -> float:
    """Weighted Euclidean distance between a normalized vector and the ideal."""
    sensor_values = sensor_vec.values
    difference = frozenset(sensor_values) ^ frozenset(ideal.values) \
        | frozenset(sensor_values) ^ frozenset(weights.weights)
    if difference:
        raise KeyMismatch("sensor, ideal, and weight keys differ", frozenset(difference))
    total = 0.0
    for key in weights.weights:
        diff = ideal.values[key] - sensor_values[key]
        total += weights.weights[key] * (diff * diff)
    return math.sqrt(total)


def _normalized_matrix(candidates: Sequence[SensorDescription],
                       keys: Sequence[str],
                       registry: PropertyRegistry) -> list[np.ndarray]:
    """One normalized column per key, aligned with candidates."""
    columns = []
    for key in keys:
        raw = np.empty(len(candidates))
        for i, sensor in enumerate(candidates):
            value = sensor.raw_values.get(key)
            if value is None:
                raise MissingProperty(key, sensor.uid)
            raw[i] = value
        prop = registry.get(key)
        lo, hi = prop.observed_min, prop.observed_max
        if len(raw) == 0:
            columns.append(raw)
            continue
        if lo is None or raw.min() < lo or raw.max() > hi:
            bad = float(raw.min()) if lo is None or raw.min() < lo else float(raw.max())
            raise OutOfBounds(key, bad, lo, hi)
        if hi == lo:
            columns.append(np.full(len(candidates), 0.5))
        else:
            columns.append((raw - lo) / (hi - lo))
    return columns


def weighted_distances(columns: Sequence[np.ndarray],
                       ideal_values: Sequence[float],
                       weight_values: Sequence[float]) -> np.ndarray:
    """Vectorized scores; terms accumulate in the given key order."""
    if not columns:
        return np.zeros(0)
    acc = np.zeros(len(columns[0]))
    for col, target, weight in zip(columns, ideal_values, weight_values):
        diff = target - col
        acc += weight * (diff * diff)
    return np.sqrt(acc)


def top_n_order(distances: np.ndarray, uids: np.ndarray, n: int) -> np.ndarray:
    """Positions of the n best rows, ordered by (score, uid) ascending."""
    order = np.lexsort((uids, distances))
    return order[:min(n, len(order))]


def rank_and_select(candidates: Sequence[SensorDescription], spec: PrioritySpec,
                    n: int, registry: PropertyRegistry,
                    ideal: IdealSensor | None = None) -> RankedResult:
    """Score all candidates and keep the n closest to the ideal.

    Fewer candidates than n returns everything, still ranked. Ties in score
    break by ascending uid, so the result order is fully deterministic.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    weights = compute_weights(spec)
    keys = weights.keys()
    if ideal is None:
        ideal = default_ideal(registry, keys)
    elif frozenset(ideal.values) != frozenset(keys):
        raise KeyMismatch("ideal keys do not match the included priorities",
                          frozenset(ideal.values) ^ frozenset(keys))
    candidates = list(candidates)
    columns = _normalized_matrix(candidates, keys, registry)
    uids = np.array([sensor.uid for sensor in candidates]) if candidates \
        else np.array([], dtype="<U1")
    distances = weighted_distances(
        columns,
        [ideal.values[key] for key in keys],
        [weights.weights[key] for key in keys],
    )
    order = top_n_order(distances, uids, n)
    entries = tuple(RankedEntry(str(uids[i]), float(distances[i])) for i in order)
    return RankedResult(entries=entries, truncated_to=n)


def removal_plan(weights: WeightVector, removable: int,
                 margin_m: float) -> list[tuple[str, int]]:
    """Per-property removal budgets, in descending weight-share order.

    Budget_i = floor(removable * q_i * (100 - margin) / 100) with
    q_i = w_i / sum(w). Ties in share order break by key so the plan is
    deterministic.
    """
    if not 0 <= margin_m <= 100:
        raise ValueError(f"margin must lie in [0, 100], got {margin_m}")
    total = math.fsum(weights.weights.values())
    factor = (100.0 - margin_m) / 100.0
    ordered = sorted(weights.weights.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(key, int(math.floor(removable * (weight / total) * factor + _FLOOR_GUARD)))
            for key, weight in ordered]


def prune_positions(uids: np.ndarray, adjusted_columns: Mapping[str, np.ndarray],
                    plan: Sequence[tuple[str, int]], n: int) -> np.ndarray:
    """Shared pruning kernel: surviving positions, original order preserved.

    adjusted_columns hold polarity-adjusted normalized values (higher means
    better regardless of polarity). Each pass drops its budget from the
    bottom of the current pool, never cutting below n survivors.
    """
    surviving = np.arange(len(uids))
    for key, budget in plan:
        budget = min(budget, len(surviving) - n)
        if budget <= 0:
            continue
        adjusted = adjusted_columns[key][surviving]
        # best first: descending adjusted value, ties by ascending uid
        order = np.lexsort((uids[surviving], -adjusted))
        keep = order[:len(surviving) - budget]
        surviving = surviving[np.sort(keep)]
    return surviving


def polarity_adjusted(normalized: np.ndarray, polarity: Polarity) -> np.ndarray:
    """Flip lower-is-better columns so that bigger always means better."""
    if polarity is Polarity.LOWER_IS_BETTER:
        return 1.0 - normalized
    return normalized


def cphf_prune(candidates: Sequence[SensorDescription], spec: PrioritySpec,
               n: int, margin_m: float,
               registry: PropertyRegistry) -> list[SensorDescription]:
    """Margin-tempered heuristic pruning of the candidate pool.

    Returns a superset-of-quota candidate list (>= n survivors) in the input
    order, ready to feed rank_and_select. margin_m = 100 is the exact mode:
    nothing is removed and the input comes back unchanged.
    """
    candidates = list(candidates)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n >= len(candidates):
        return candidates
    weights = compute_weights(spec)
    keys = weights.keys()
    plan = removal_plan(weights, len(candidates) - n, margin_m)
    columns = _normalized_matrix(candidates, keys, registry)
    adjusted = {
        key: polarity_adjusted(col, registry.get(key).polarity)
        for key, col in zip(keys, columns)
    }
    uids = np.array([sensor.uid for sensor in candidates])
    surviving = prune_positions(uids, adjusted, plan, n)
    return [candidates[i] for i in surviving]


def cphf_accuracy(exact: RankedResult, heuristic: RankedResult) -> float:
    """Fraction of the exact top-n uids that the heuristic run also returned."""
    if exact.truncated_to != heuristic.truncated_to:
        raise KeyMismatch(
            f"results truncated to different sizes: "
            f"{exact.truncated_to} vs {heuristic.truncated_to}")
    n = exact.truncated_to
    overlap = frozenset(exact.uids()) & frozenset(heuristic.uids())
    return len(overlap) / n
