"""The local search pipeline: filter, optional heuristic prune, rank.

One columnar implementation serves every caller: the request broker, the CLI,
and each simulated node of the distributed strategies. Scores produced here
are bit-identical to the list-based ranking operations because both paths
apply the same elementwise operations in the same property order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .corpus import Corpus
from .query import FilterExpr, evaluate_indices
from .ranking import (
    IdealSensor,
    PrioritySpec,
    RankedEntry,
    RankedResult,
    compute_weights,
    ideal_from_native,
    polarity_adjusted,
    prune_positions,
    removal_plan,
    top_n_order,
    weighted_distances,
)


@dataclass(frozen=True)
class SearchRequest:
    """Everything a search run needs, strategy-independent."""

    filter: FilterExpr = field(default_factory=FilterExpr)
    priorities: PrioritySpec = None  # required; validated by the caller
    n: int = 50
    ideal_native: Mapping[str, float] = field(default_factory=dict)
    heuristic_enabled: bool = False
    margin_m: float = 50.0
    strategy: str = "local"
    k: int | None = None


@dataclass
class PipelineRun:
    """Selected rows plus the phase decomposition the diagnostics report."""

    corpus: Corpus
    selected: np.ndarray          # row indices into corpus, result order
    distances: np.ndarray         # scores aligned with selected
    n: int
    candidates_before: int
    candidates_after_prune: int
    excluded_missing_property: int
    filter_s: float
    prune_s: float
    rank_s: float

    def entries(self) -> list[RankedEntry]:
        return [RankedEntry(str(self.corpus.uids[i]), float(d))
                for i, d in zip(self.selected, self.distances)]

    def ranked_result(self) -> RankedResult:
        return RankedResult(entries=tuple(self.entries()), truncated_to=self.n)

    @property
    def shortfall(self) -> bool:
        return len(self.selected) < self.n


def run_search(corpus: Corpus, request: SearchRequest) -> PipelineRun:
    """Execute filter -> prune -> rank over one snapshot."""
    if request.n < 1:
        raise ValueError(f"n must be >= 1, got {request.n}")
    weights = compute_weights(request.priorities)
    keys = weights.keys()
    registry = corpus.registry

    started = time.perf_counter()
    indices, diagnostics = evaluate_indices(request.filter, corpus)
    # sensors missing a ranked property cannot be scored; exclude and count
    missing = np.zeros(len(indices), dtype=bool)
    for key in keys:
        column = corpus.columns.get(key)
        if column is None:
            missing |= True
        else:
            missing |= np.isnan(column[indices])
    candidates = indices[~missing]
    excluded = diagnostics.excluded_missing_property + int(missing.sum())
    filter_s = time.perf_counter() - started

    ideal = ideal_from_native(registry, request.ideal_native, keys)

    started = time.perf_counter()
    survivors = candidates
    if request.heuristic_enabled and request.n < len(candidates):
        plan = removal_plan(weights, len(candidates) - request.n, request.margin_m)
        adjusted = {
            key: polarity_adjusted(corpus.normalized_column(key),
                                   registry.get(key).polarity)[candidates]
            for key in keys
        }
        positions = prune_positions(corpus.uids[candidates], adjusted, plan, request.n)
        survivors = candidates[positions]
    prune_s = time.perf_counter() - started

    started = time.perf_counter()
    columns = [corpus.normalized_column(key)[survivors] for key in keys]
    distances = weighted_distances(
        columns,
        [ideal.values[key] for key in keys],
        [weights.weights[key] for key in keys],
    )
    order = top_n_order(distances, corpus.uids[survivors], request.n)
    rank_s = time.perf_counter() - started

    return PipelineRun(
        corpus=corpus,
        selected=survivors[order],
        distances=distances[order],
        n=request.n,
        candidates_before=len(candidates),
        candidates_after_prune=len(survivors),
        excluded_missing_property=excluded,
        filter_s=filter_s,
        prune_s=prune_s,
        rank_s=rank_s,
    )
