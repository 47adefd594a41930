"""Request broker: one object that owns the corpus and answers searches.

The HTTP service, the CLI, and tests all funnel through Engine so request
validation and response shaping live in exactly one place. Requests and
responses are plain JSON-compatible dicts; the wire schema is documented in
docs/wire-schema.md.
"""

from __future__ import annotations

import math
import threading
import time
from typing import Any, Mapping, Sequence

from . import corpus as corpus_mod
from .core import PropertyRegistry, canonical_registry
from .corpus import Corpus, GeneratorConfig
from .distributed import (SearchOutcome, simulate_timeline, uniform_topology)
from .errors import (ConfigError, InvalidK, InvalidRequest, NoCorpus,
                     OutOfBounds, UnknownProperty)
from .pipeline import SearchRequest, run_search
from .query import FilterExpr, parse_filter
from .ranking import PriorityEntry, PrioritySpec, compute_weights

STRATEGIES = ("local", "chain", "parallel", "parallel_k")

# fitted record size from the reference saving grid, rounded to whole bytes
DEFAULT_RECORD_SIZE_BYTES = 202

_SEARCH_KEYS = frozenset({"query", "filter", "priorities", "scale", "n",
                          "ideal", "heuristic", "strategy", "k"})
_SIMULATE_KEYS = frozenset({"strategy", "k", "nodes", "latency_ms",
                            "bandwidth_MBps", "processing_ms",
                            "record_size_bytes", "request"})


def _require_int(value: Any, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidRequest(f"{name} must be an integer")
    if value < minimum:
        raise InvalidRequest(f"{name} must be >= {minimum}, got {value}")
    return value


def _require_number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidRequest(f"{name} must be a number")
    result = float(value)
    if not math.isfinite(result):
        raise InvalidRequest(f"{name} must be finite")
    return result


def _parse_priorities(raw: Any) -> PrioritySpec:
    if not isinstance(raw, Sequence) or isinstance(raw, (str, bytes)):
        raise InvalidRequest("priorities must be a list of entries")
    if not raw:
        raise InvalidRequest("priorities must not be empty")
    entries = []
    for item in raw:
        if not isinstance(item, Mapping):
            raise InvalidRequest("each priority must be an object")
        extra = set(item) - {"key", "slider", "included"}
        if extra:
            raise InvalidRequest(f"unknown priority fields: {sorted(extra)}")
        key = item.get("key")
        if not isinstance(key, str) or not key:
            raise InvalidRequest("priority key must be a non-empty string")
        slider = _require_number(item.get("slider"), f"slider for {key!r}")
        included = item.get("included", True)
        if not isinstance(included, bool):
            raise InvalidRequest(f"included for {key!r} must be a boolean")
        entries.append(PriorityEntry(key=key, slider=slider, included=included))
    return PrioritySpec(entries=tuple(entries))


def parse_search_request(doc: Mapping[str, Any]) -> SearchRequest:
    """Validate a wire request document into a SearchRequest."""
    if not isinstance(doc, Mapping):
        raise InvalidRequest("request body must be a JSON object")
    unknown = set(doc) - _SEARCH_KEYS
    if unknown:
        raise InvalidRequest(f"unknown request fields: {sorted(unknown)}")

    if "query" in doc and "filter" in doc:
        raise InvalidRequest("provide query (text) or filter (structured), not both")
    if "filter" in doc:
        raw_filter = doc["filter"]
        if not isinstance(raw_filter, Mapping):
            raise InvalidRequest("filter must be an object")
        filter_expr = FilterExpr.from_dict(raw_filter)
    else:
        query = doc.get("query", "")
        if not isinstance(query, str):
            raise InvalidRequest("query must be a string")
        filter_expr = parse_filter(query)

    if "priorities" not in doc:
        raise InvalidRequest("priorities are required")
    spec = _parse_priorities(doc["priorities"])
    if "scale" in doc:
        spec = PrioritySpec(entries=spec.entries,
                            scale=_require_number(doc["scale"], "scale"))
    try:
        spec.validate()
    except (ValueError, TypeError) as exc:
        raise InvalidRequest(str(exc)) from exc

    n = _require_int(doc.get("n", 50), "n", minimum=1)

    ideal_raw = doc.get("ideal", {})
    if not isinstance(ideal_raw, Mapping):
        raise InvalidRequest("ideal must be an object of native values")
    ideal = {key: _require_number(value, f"ideal[{key!r}]")
             for key, value in ideal_raw.items()}

    heuristic = doc.get("heuristic", {})
    if not isinstance(heuristic, Mapping):
        raise InvalidRequest("heuristic must be an object")
    extra = set(heuristic) - {"enabled", "margin"}
    if extra:
        raise InvalidRequest(f"unknown heuristic fields: {sorted(extra)}")
    enabled = heuristic.get("enabled", False)
    if not isinstance(enabled, bool):
        raise InvalidRequest("heuristic.enabled must be a boolean")
    if "margin" in heuristic and not enabled:
        raise InvalidRequest("heuristic.margin requires heuristic.enabled")
    margin = _require_number(heuristic.get("margin", 50.0), "heuristic.margin")
    if not 0.0 <= margin <= 100.0:
        raise InvalidRequest(f"heuristic.margin must be in [0, 100], got {margin}")

    strategy = doc.get("strategy", "local")
    if strategy not in STRATEGIES:
        raise InvalidRequest(f"strategy must be one of {STRATEGIES}")
    k = doc.get("k")
    if k is not None:
        if strategy != "parallel_k":
            raise InvalidRequest("k is only valid with strategy parallel_k")
        if isinstance(k, bool) or not isinstance(k, int):
            raise InvalidRequest("k must be an integer")
        if k < 1 or k >= n:
            raise InvalidK(k, n)
    elif strategy == "parallel_k":
        raise InvalidRequest("strategy parallel_k requires k")

    return SearchRequest(filter=filter_expr, priorities=spec, n=n,
                         ideal_native=ideal, heuristic_enabled=enabled,
                         margin_m=margin, strategy=strategy, k=k)


class Engine:
    """Owns one corpus (swapped atomically) and serves search requests."""

    def __init__(self, corpus: Corpus | None = None):
        self._lock = threading.Lock()
        self._corpus = corpus

    @property
    def corpus(self) -> Corpus | None:
        return self._corpus

    def set_corpus(self, corpus: Corpus) -> None:
        with self._lock:
            self._corpus = corpus

    def _require_corpus(self) -> Corpus:
        current = self._corpus
        if current is None:
            raise NoCorpus()
        return current

    # -- corpus management -------------------------------------------------

    def load_corpus(self, doc: Mapping[str, Any]) -> dict:
        """Load from a corpus file or generate one; returns a summary."""
        if not isinstance(doc, Mapping):
            raise InvalidRequest("request body must be a JSON object")
        unknown = set(doc) - {"path", "generate"}
        if unknown:
            raise InvalidRequest(f"unknown request fields: {sorted(unknown)}")
        if ("path" in doc) == ("generate" in doc):
            raise InvalidRequest("provide exactly one of path or generate")
        if "path" in doc:
            path = doc["path"]
            if not isinstance(path, str) or not path:
                raise InvalidRequest("path must be a non-empty string")
            loaded = corpus_mod.load(path)
        else:
            loaded = Corpus.from_config(self._parse_generate(doc["generate"]))
        self.set_corpus(loaded)
        return self.corpus_summary()

    @staticmethod
    def _parse_generate(raw: Any) -> GeneratorConfig:
        if not isinstance(raw, Mapping):
            raise InvalidRequest("generate must be an object")
        try:
            return GeneratorConfig.from_dict(raw)
        except ConfigError as exc:
            raise InvalidRequest(str(exc)) from exc

    def corpus_summary(self) -> dict:
        current = self._require_corpus()
        return {"snapshot_id": current.snapshot_id,
                "count": len(current),
                "properties": list(current.property_keys)}

    # -- lookups -----------------------------------------------------------

    def get_sensor(self, uid: str) -> dict:
        current = self._require_corpus()
        index = current.index_of(uid)
        if index is None:
            raise KeyError(uid)
        sensor = current.sensor_at(index)
        normalized = {}
        for key, value in sensor.raw_values.items():
            try:
                normalized[key] = current.registry.normalize(key, value)
            except (OutOfBounds, UnknownProperty):
                continue
        return {"uid": sensor.uid, "sensor_type": sensor.sensor_type,
                "region": sensor.region,
                "raw_values": dict(sensor.raw_values),
                "normalized": normalized}

    def properties_listing(self) -> list[dict]:
        current = self._corpus
        registry = current.registry if current is not None else canonical_registry()
        listing = []
        for key in registry.keys():
            prop = registry.get(key)
            listing.append({"key": prop.key, "unit": prop.unit,
                            "polarity": prop.polarity.value,
                            "observed_min": prop.observed_min,
                            "observed_max": prop.observed_max})
        return listing

    # -- search ------------------------------------------------------------

    def search(self, doc: Mapping[str, Any]) -> dict:
        request = parse_search_request(doc)
        if request.strategy != "local":
            raise InvalidRequest(
                "distributed strategies are served by the simulate endpoint")
        current = self._require_corpus()
        started = time.perf_counter()
        run = run_search(current, request)
        total_s = time.perf_counter() - started
        weights = compute_weights(request.priorities)
        entries = []
        for index, distance in zip(run.selected, run.distances):
            sensor = current.sensor_at(int(index))
            entries.append({"uid": sensor.uid, "cpwi": float(distance),
                            "sensor_type": sensor.sensor_type,
                            "region": sensor.region,
                            "values": dict(sensor.raw_values)})
        return {
            "snapshot_id": current.snapshot_id,
            "n": request.n,
            "count": len(entries),
            "shortfall": run.shortfall,
            "entries": entries,
            "weights": dict(weights.weights),
            "diagnostics": {
                "candidates_before": run.candidates_before,
                "candidates_after_prune": run.candidates_after_prune,
                "excluded_missing_property": run.excluded_missing_property,
                "heuristic_enabled": request.heuristic_enabled,
                "margin": request.margin_m if request.heuristic_enabled else None,
            },
            "timing_ms": {
                "filter": run.filter_s * 1e3,
                "prune": run.prune_s * 1e3,
                "rank": run.rank_s * 1e3,
                "total": total_s * 1e3,
            },
        }

    # -- distributed simulation ---------------------------------------------

    def simulate(self, doc: Mapping[str, Any]) -> dict:
        """Split the loaded corpus across simulated nodes and run a strategy."""
        if not isinstance(doc, Mapping):
            raise InvalidRequest("request body must be a JSON object")
        unknown = set(doc) - _SIMULATE_KEYS
        if unknown:
            raise InvalidRequest(f"unknown request fields: {sorted(unknown)}")
        strategy = doc.get("strategy", "parallel")
        if strategy not in STRATEGIES:
            raise InvalidRequest(f"strategy must be one of {STRATEGIES}")
        nodes = _require_int(doc.get("nodes", 4), "nodes", minimum=1)
        request_doc = doc.get("request")
        if not isinstance(request_doc, Mapping):
            raise InvalidRequest("request is required and must be an object")
        if "strategy" in request_doc or "k" in request_doc:
            raise InvalidRequest(
                "put strategy and k at the top level of the simulate body")
        request = parse_search_request(request_doc)
        k = doc.get("k")
        if k is not None:
            if strategy != "parallel_k":
                raise InvalidRequest("k is only valid with strategy parallel_k")
            if isinstance(k, bool) or not isinstance(k, int):
                raise InvalidRequest("k must be an integer")
            if k < 1 or k >= request.n:
                raise InvalidK(k, request.n)
        elif strategy == "parallel_k":
            raise InvalidRequest("strategy parallel_k requires k")

        current = self._require_corpus()
        if strategy == "local" or nodes == 1:
            return self._simulate_local(current, request, nodes)

        latency_ms = _require_number(doc.get("latency_ms", 10.0), "latency_ms")
        if latency_ms < 0:
            raise InvalidRequest("latency_ms must be non-negative")
        bandwidth = doc.get("bandwidth_MBps")
        if bandwidth is not None:
            bandwidth = _require_number(bandwidth, "bandwidth_MBps")
            if bandwidth <= 0:
                raise InvalidRequest("bandwidth_MBps must be positive")
        processing_ms = _require_number(doc.get("processing_ms", 5.0),
                                        "processing_ms")
        if processing_ms < 0:
            raise InvalidRequest("processing_ms must be non-negative")
        record_size = _require_int(doc.get("record_size_bytes",
                                           DEFAULT_RECORD_SIZE_BYTES),
                                   "record_size_bytes", minimum=1)

        parts = current.split(nodes)
        topology = uniform_topology(
            node_count=nodes,
            per_node=max(len(part) for part in parts),
            record_size=record_size,
            latency_s=latency_ms / 1e3,
            bandwidth_bps=None if bandwidth is None else bandwidth * 1e6,
            processing_s=processing_ms / 1e3,
        )
        outcome = simulate_timeline(strategy, topology, parts, request, k=k)
        return outcome.to_dict()

    @staticmethod
    def _simulate_local(current: Corpus, request: SearchRequest,
                        nodes: int) -> dict:
        # a single node has nothing to send; report a plain local run in the
        # same envelope so callers can treat every node count uniformly
        run = run_search(current, request)
        result = run.ranked_result()
        outcome = SearchOutcome(
            strategy="local",
            result=result,
            total_time_ns=0,
            bytes_by_link={},
            rounds=0,
            events=[],
            sri_processing_ns=0,
        )
        return outcome.to_dict()
