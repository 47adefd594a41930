"""Multi-node top-N search: timeline simulation and the analytic cost model.

Node 1 is the initiator (the node that receives the search request and must
end up holding the final top-N). Three strategies are simulated:

* chain: the request walks node 1 -> 2 -> ... -> n; every node merges the
  incoming top-N frame with its locally ranked candidates and forwards the
  best N; the last node returns the frame to node 1. One communication round,
  n hops (including the return leg), each carrying a fixed N-record frame.
* parallel: every remote node ranks locally and sends its top-N frame to the
  initiator, which merges. One round, n-1 frames.
* parallel_k: remotes first send every k-th record of their local top-N list
  (uid and score only). The initiator sorts these samples ascending and
  greedily certifies k-block prefixes (a sample at local position j*k proves
  j*k records score no worse than it) until at least N records are certified;
  each node's fetch prefix then extends through its first sample strictly
  above the certification threshold, which makes the fetched union a provable
  superset of the global top N even under score ties. Round 2 fetches only
  records not already delivered as samples. Two rounds; with k = 1 the
  samples already cover everything and round 2 fetches nothing.

Time model: integer nanoseconds on a virtual clock. Data messages pay link
latency plus bytes/bandwidth; query dispatch is free (the closed-form chain
and parallel totals contain no request-leg terms), with one exception: the
round-2 fetch requests of parallel_k pay link latency, because the second
round trip is that protocol's distinctive cost. Link matrices must be
symmetric. All merges break score ties by ascending uid, so outcomes are
deterministic and identical across strategies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import ConfigError, InvalidK, SimFault
from .pipeline import SearchRequest, run_search
from .ranking import RankedEntry, RankedResult


def _ns(seconds: float) -> int:
    return int(round(seconds * 1e9))


@dataclass(frozen=True)
class ClusterTopology:
    """Cluster shape: per-node corpus sizes and symmetric link parameters.

    Matrices are indexed [i-1][j-1] for 1-based node ids. A None latency
    entry means the link does not exist; a None bandwidth means unbounded.
    """

    node_count: int
    corpus_sizes: tuple[int, ...]
    record_size: int
    latency_s: tuple[tuple[float | None, ...], ...]
    bandwidth_bps: tuple[tuple[float | None, ...], ...]
    processing_s: tuple[float, ...]
    corpus_paths: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 2:
            raise SimFault(f"topology needs at least 2 nodes, got {n}")
        if len(self.corpus_sizes) != n or len(self.processing_s) != n:
            raise SimFault("corpus_sizes and processing_s must list every node")
        if any(size < 0 for size in self.corpus_sizes):
            raise SimFault("corpus sizes must be non-negative")
        if self.record_size <= 0:
            raise SimFault(f"record_size must be positive, got {self.record_size}")
        if len(self.latency_s) != n or len(self.bandwidth_bps) != n:
            raise SimFault("link matrices must be node_count x node_count")
        for i in range(n):
            if len(self.latency_s[i]) != n or len(self.bandwidth_bps[i]) != n:
                raise SimFault("link matrices must be node_count x node_count")
            for j in range(n):
                lat = self.latency_s[i][j]
                if lat is not None and lat < 0:
                    raise SimFault(f"negative latency on link {i + 1}->{j + 1}")
                if lat != self.latency_s[j][i]:
                    raise SimFault("link matrices must be symmetric")
                bw = self.bandwidth_bps[i][j]
                if bw is not None and not bw > 0:
                    raise SimFault(f"bandwidth on link {i + 1}->{j + 1} must be positive")

    def latency_ns(self, src: int, dst: int, hop: int | None = None) -> int:
        value = self.latency_s[src - 1][dst - 1]
        if value is None:
            raise SimFault(f"no link between node {src} and node {dst}", hop=hop)
        return _ns(value)

    def transfer_ns(self, src: int, dst: int, nbytes: int) -> int:
        bandwidth = self.bandwidth_bps[src - 1][dst - 1]
        if bandwidth is None or math.isinf(bandwidth):
            return 0
        return int(round(nbytes / bandwidth * 1e9))

    def processing_ns(self, node: int) -> int:
        return _ns(self.processing_s[node - 1])


def uniform_topology(node_count: int, per_node: int, record_size: int,
                     latency_s: float = 0.0,
                     bandwidth_bps: float | None = None,
                     processing_s: float | Sequence[float] = 0.0) -> ClusterTopology:
    """Fully connected cluster with identical links everywhere."""
    if isinstance(processing_s, (int, float)):
        processing = tuple(float(processing_s) for _ in range(node_count))
    else:
        processing = tuple(float(p) for p in processing_s)
    latency = tuple(
        tuple(0.0 if i == j else latency_s for j in range(node_count))
        for i in range(node_count))
    bandwidth = tuple(tuple(bandwidth_bps for _ in range(node_count))
                      for _ in range(node_count))
    return ClusterTopology(
        node_count=node_count,
        corpus_sizes=tuple(per_node for _ in range(node_count)),
        record_size=record_size,
        latency_s=latency,
        bandwidth_bps=bandwidth,
        processing_s=processing,
    )


@dataclass(frozen=True)
class Event:
    kind: str       # "compute" | "message"
    src: int
    dst: int
    start_ns: int
    end_ns: int
    bytes: int
    label: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "src": self.src, "dst": self.dst,
                "start_ns": self.start_ns, "end_ns": self.end_ns,
                "bytes": self.bytes, "label": self.label}


@dataclass
class SearchOutcome:
    """Result of one simulated strategy run plus its full cost accounting."""

    strategy: str
    result: RankedResult
    total_time_ns: int
    bytes_by_link: dict[tuple[int, int], int]
    rounds: int
    events: list[Event]
    sri_processing_ns: int
    remote_component_ns: int | None = None
    k: int | None = None
    retrieved_uids: tuple[str, ...] | None = None

    def total_bytes(self) -> int:
        return sum(self.bytes_by_link.values())

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "k": self.k,
            "result": {
                "truncated_to": self.result.truncated_to,
                "entries": [{"uid": e.uid, "cpwi": e.cpwi} for e in self.result.entries],
            },
            "total_time_ns": self.total_time_ns,
            "rounds": self.rounds,
            "sri_processing_ns": self.sri_processing_ns,
            "remote_component_ns": self.remote_component_ns,
            "total_bytes": self.total_bytes(),
            "bytes_by_link": [
                {"src": src, "dst": dst, "bytes": count}
                for (src, dst), count in sorted(self.bytes_by_link.items())
            ],
            "events": [event.to_dict() for event in self.events],
        }


def _node_entries(corpus: Corpus, request: SearchRequest) -> list[RankedEntry]:
    """A node's local top-N list, ascending (score, uid)."""
    return run_search(corpus, request).entries()


def _merge_top(pools: Sequence[Sequence[RankedEntry]], n: int) -> list[RankedEntry]:
    merged = [entry for pool in pools for entry in pool]
    merged.sort(key=lambda entry: (entry.cpwi, entry.uid))
    return merged[:n]


def _check_cluster(topology: ClusterTopology, corpora: Sequence[Corpus]) -> None:
    if len(corpora) != topology.node_count:
        raise SimFault(f"expected {topology.node_count} per-node corpora, "
                       f"got {len(corpora)}")
    registries = {id(corpus.registry) for corpus in corpora}
    if len(registries) > 1:
        raise SimFault("all nodes must share one property registry; "
                       "scores are not comparable across diverging bounds")


def _simulate_chain(topology: ClusterTopology, corpora: Sequence[Corpus],
                    request: SearchRequest) -> SearchOutcome:
    n_nodes = topology.node_count
    frame = request.n * topology.record_size
    events: list[Event] = []
    bytes_by_link: dict[tuple[int, int], int] = {}
    clock = 0
    rolling: list[RankedEntry] = []
    for hop, node in enumerate(range(1, n_nodes + 1), start=1):
        local = _node_entries(corpora[node - 1], request)
        start = clock
        clock += topology.processing_ns(node)
        events.append(Event("compute", node, node, start, clock, 0,
                            f"rank and merge at node {node}"))
        rolling = _merge_top([rolling, local], request.n)
        dst = node + 1 if node < n_nodes else 1
        duration = (topology.latency_ns(node, dst, hop=hop)
                    + topology.transfer_ns(node, dst, frame))
        events.append(Event("message", node, dst, clock, clock + duration,
                            frame, "top-N frame"))
        bytes_by_link[(node, dst)] = bytes_by_link.get((node, dst), 0) + frame
        clock += duration
    return SearchOutcome(
        strategy="chain",
        result=RankedResult(tuple(rolling), truncated_to=request.n),
        total_time_ns=clock,
        bytes_by_link=bytes_by_link,
        rounds=1,
        events=events,
        sri_processing_ns=topology.processing_ns(1),
    )


def _simulate_parallel(topology: ClusterTopology, corpora: Sequence[Corpus],
                       request: SearchRequest) -> SearchOutcome:
    n_nodes = topology.node_count
    frame = request.n * topology.record_size
    events: list[Event] = []
    bytes_by_link: dict[tuple[int, int], int] = {}
    sri_pro = topology.processing_ns(1)
    pools = [_node_entries(corpora[0], request)]
    events.append(Event("compute", 1, 1, 0, sri_pro, 0, "rank at initiator"))
    remote_component = 0
    for hop, node in enumerate(range(2, n_nodes + 1), start=1):
        pools.append(_node_entries(corpora[node - 1], request))
        pro = topology.processing_ns(node)
        events.append(Event("compute", node, node, 0, pro, 0,
                            f"rank at node {node}"))
        duration = (topology.latency_ns(node, 1, hop=hop)
                    + topology.transfer_ns(node, 1, frame))
        events.append(Event("message", node, 1, pro, pro + duration, frame,
                            "top-N frame"))
        bytes_by_link[(node, 1)] = bytes_by_link.get((node, 1), 0) + frame
        remote_component = max(remote_component, pro + duration)
    return SearchOutcome(
        strategy="parallel",
        result=RankedResult(tuple(_merge_top(pools, request.n)),
                            truncated_to=request.n),
        total_time_ns=max(sri_pro, remote_component),
        bytes_by_link=bytes_by_link,
        rounds=1,
        events=events,
        sri_processing_ns=sri_pro,
        remote_component_ns=remote_component,
    )


def _simulate_parallel_k(topology: ClusterTopology, corpora: Sequence[Corpus],
                         request: SearchRequest, k: int) -> SearchOutcome:
    n_requested = request.n
    if not isinstance(k, int) or k < 1 or k >= n_requested:
        raise InvalidK(k, n_requested)
    record = topology.record_size
    events: list[Event] = []
    bytes_by_link: dict[tuple[int, int], int] = {}
    sri_pro = topology.processing_ns(1)
    sri_local = _node_entries(corpora[0], request)
    events.append(Event("compute", 1, 1, 0, sri_pro, 0, "rank at initiator"))

    remotes = list(range(2, topology.node_count + 1))
    node_lists: dict[int, list[RankedEntry]] = {}
    samples: dict[int, list[tuple[RankedEntry, int]]] = {}
    round1_end = sri_pro
    remote_component = 0
    for hop, node in enumerate(remotes, start=1):
        local = _node_entries(corpora[node - 1], request)
        node_lists[node] = local
        samples[node] = [(local[pos - 1], pos)
                         for pos in range(k, len(local) + 1, k)]
        pro = topology.processing_ns(node)
        events.append(Event("compute", node, node, 0, pro, 0,
                            f"rank at node {node}"))
        sample_bytes = len(samples[node]) * record
        duration = (topology.latency_ns(node, 1, hop=hop)
                    + topology.transfer_ns(node, 1, sample_bytes))
        events.append(Event("message", node, 1, pro, pro + duration,
                            sample_bytes, "round-1 samples"))
        bytes_by_link[(node, 1)] = bytes_by_link.get((node, 1), 0) + sample_bytes
        round1_end = max(round1_end, pro + duration)
        remote_component = max(remote_component, pro + duration)

    # greedy k-block certification: consume samples ascending until >= N
    # records are certified, then note the threshold score
    ordered_samples = sorted(
        ((entry.cpwi, entry.uid, node, pos)
         for node, node_samples in samples.items()
         for entry, pos in node_samples))
    certified = 0
    threshold: float | None = None
    for score, _uid, _node, _pos in ordered_samples:
        certified += k
        threshold = score
        if certified >= n_requested:
            break
    exhausted = certified < n_requested

    retrieved: list[RankedEntry] = list(sri_local)
    clock = round1_end
    for node in remotes:
        local = node_lists[node]
        if exhausted:
            prefix = len(local)
        else:
            last_certified = 0
            for entry, pos in samples[node]:
                if entry.cpwi <= threshold:
                    last_certified = pos
                else:
                    break
            # one extra block covers the partial block above the last
            # certified sample, preserving the superset guarantee under ties
            prefix = min(last_certified + k, len(local))
        sampled_positions = {pos for _, pos in samples[node]}
        new_records = [local[i] for i in range(prefix)
                       if (i + 1) not in sampled_positions]
        retrieved.extend(local[:prefix])
        retrieved.extend(entry for entry, pos in samples[node] if pos > prefix)
        if new_records:
            request_dur = topology.latency_ns(1, node)
            events.append(Event("message", 1, node, round1_end,
                                round1_end + request_dur, 0,
                                "round-2 fetch request"))
            data_bytes = len(new_records) * record
            send = round1_end + request_dur
            duration = (topology.latency_ns(node, 1)
                        + topology.transfer_ns(node, 1, data_bytes))
            events.append(Event("message", node, 1, send, send + duration,
                                data_bytes, "round-2 prefix"))
            bytes_by_link[(node, 1)] = bytes_by_link.get((node, 1), 0) + data_bytes
            clock = max(clock, send + duration)

    return SearchOutcome(
        strategy="parallel_k",
        result=RankedResult(tuple(_merge_top([retrieved], n_requested)),
                            truncated_to=n_requested),
        total_time_ns=clock,
        bytes_by_link=bytes_by_link,
        rounds=2,
        events=events,
        sri_processing_ns=sri_pro,
        remote_component_ns=remote_component,
        k=k,
        retrieved_uids=tuple(sorted(entry.uid for entry in retrieved)),
    )


def simulate_timeline(strategy: str, topology: ClusterTopology,
                      per_node_corpora: Sequence[Corpus],
                      request: SearchRequest,
                      k: int | None = None) -> SearchOutcome:
    """Run one strategy over per-node corpora; deterministic event log."""
    _check_cluster(topology, per_node_corpora)
    if strategy == "chain":
        return _simulate_chain(topology, per_node_corpora, request)
    if strategy == "parallel":
        return _simulate_parallel(topology, per_node_corpora, request)
    if strategy == "parallel_k":
        if k is None:
            raise InvalidK(-1, request.n)
        return _simulate_parallel_k(topology, per_node_corpora, request, k)
    raise ConfigError(f"unknown strategy: {strategy!r}")


def search_chain(topology: ClusterTopology, per_node_corpora: Sequence[Corpus],
                 request: SearchRequest) -> SearchOutcome:
    return simulate_timeline("chain", topology, per_node_corpora, request)


def search_parallel(topology: ClusterTopology, per_node_corpora: Sequence[Corpus],
                    request: SearchRequest) -> SearchOutcome:
    return simulate_timeline("parallel", topology, per_node_corpora, request)


def search_parallel_k(topology: ClusterTopology, per_node_corpora: Sequence[Corpus],
                      request: SearchRequest, k: int) -> SearchOutcome:
    return simulate_timeline("parallel_k", topology, per_node_corpora, request, k=k)


def chain_total_ns(topology: ClusterTopology) -> int:
    """Closed-form chain total under the pure-latency model."""
    n = topology.node_count
    total = sum(topology.processing_ns(node) for node in range(1, n + 1))
    total += sum(topology.latency_ns(node, node + 1) for node in range(1, n))
    total += topology.latency_ns(n, 1)
    return total


def parallel_remote_ns(topology: ClusterTopology) -> int:
    """Closed-form parallel remote component under the pure-latency model."""
    return max(topology.processing_ns(node) + topology.latency_ns(1, node)
               for node in range(2, topology.node_count + 1))


# ---------------------------------------------------------------------------
# analytic communication model for the k-extension


@dataclass(frozen=True)
class SavingEstimate:
    """Bytes saved versus plain parallel, under two published model forms.

    reconstruction_bytes follows the form that reproduces the reference grid:
    (n-1)*N*r - [(n-1)*(S/k) + N + (k-1)*(n-1)]*r. literal_bytes follows the
    equation as printed alongside that grid, which does not reproduce it; it
    is kept for comparison and labeled accordingly.
    """

    reconstruction_bytes: float
    literal_bytes: float


def analytic_saving(node_count: int, per_node_records: int, n_requested: int,
                    k: int, record_size: float) -> SavingEstimate:
    if k < 1 or k >= n_requested:
        raise InvalidK(k, n_requested)
    remotes = node_count - 1
    baseline = remotes * n_requested
    round1 = remotes * (per_node_records / k)
    round2 = n_requested + (k - 1) * remotes
    reconstruction = (baseline - round1 - round2) * record_size
    literal = (remotes * per_node_records
               - (remotes * per_node_records / k + n_requested
                  + (k - 1) * node_count)) * record_size
    return SavingEstimate(reconstruction_bytes=reconstruction,
                          literal_bytes=literal)


# reference measurement grid for a 4-node deployment with 10^6 records per
# node, in decimal megabytes; cells with k >= N are not applicable
REFERENCE_K_VALUES = (10, 100, 500, 1000, 5000, 10000, 50000, 100000, 500000)
REFERENCE_N_VALUES = (100, 500, 1000, 5000, 10000, 50000, 100000, 500000,
                      1000000)
REFERENCE_SAVINGS_MB: Mapping[tuple[int, int], float] = {
    (10, 100): -60.7, (10, 500): -60.5, (10, 1000): -60.3, (10, 5000): -58.7,
    (10, 10000): -56.7, (10, 50000): -40.5, (10, 100000): -20.2,
    (10, 500000): 141.6, (10, 1000000): 344.0,
    (100, 500): -5.9, (100, 1000): -5.7, (100, 5000): -4.1,
    (100, 10000): -2.1, (100, 50000): 14.1, (100, 100000): 34.3,
    (100, 500000): 196.2, (100, 1000000): 398.5,
    (500, 1000): -1.1, (500, 5000): 0.5, (500, 10000): 2.5,
    (500, 50000): 18.7, (500, 100000): 38.9, (500, 500000): 200.8,
    (500, 1000000): 403.1,
    (1000, 5000): 0.8, (1000, 10000): 2.8, (1000, 50000): 19.0,
    (1000, 100000): 39.3, (1000, 500000): 201.1, (1000, 1000000): 403.5,
    (5000, 10000): 0.9, (5000, 50000): 17.1, (5000, 100000): 37.3,
    (5000, 500000): 199.2, (5000, 1000000): 401.5,
    (10000, 50000): 14.1, (10000, 100000): 34.3, (10000, 500000): 196.2,
    (10000, 1000000): 398.5,
    (50000, 100000): 10.1, (50000, 500000): 172.0, (50000, 1000000): 374.3,
    (100000, 500000): 141.6, (100000, 1000000): 344.0,
    (500000, 1000000): 101.2,
}

REFERENCE_NODE_COUNT = 4
REFERENCE_PER_NODE_RECORDS = 10 ** 6
_MB = 1e6  # decimal megabytes; the fitted record size absorbs the convention


@dataclass(frozen=True)
class CellFit:
    k: int
    n_requested: int
    reference_mb: float
    predicted_mb: float

    @property
    def error_mb(self) -> float:
        return abs(self.predicted_mb - self.reference_mb)

    def within(self, relative: float = 0.05, absolute_mb: float = 0.3) -> bool:
        return self.error_mb <= max(relative * abs(self.reference_mb), absolute_mb)


@dataclass(frozen=True)
class FitResult:
    record_size: float
    cells: tuple[CellFit, ...]

    def fraction_within(self, relative: float = 0.05,
                        absolute_mb: float = 0.3) -> float:
        hits = sum(cell.within(relative, absolute_mb) for cell in self.cells)
        return hits / len(self.cells)


def _saving_coefficient(k: int, n_requested: int,
                        node_count: int = REFERENCE_NODE_COUNT,
                        per_node: int = REFERENCE_PER_NODE_RECORDS) -> float:
    """Records saved per byte of record size (reconstruction form)."""
    remotes = node_count - 1
    return (remotes * n_requested - remotes * (per_node / k)
            - n_requested - (k - 1) * remotes)


def fit_record_size() -> FitResult:
    """Least-squares record size over all applicable reference cells."""
    numerator = denominator = 0.0
    for (k, n_requested), reference in REFERENCE_SAVINGS_MB.items():
        coeff_mb = _saving_coefficient(k, n_requested) / _MB
        numerator += coeff_mb * reference
        denominator += coeff_mb * coeff_mb
    record_size = numerator / denominator
    cells = tuple(
        CellFit(k, n_requested, reference,
                _saving_coefficient(k, n_requested) * record_size / _MB)
        for (k, n_requested), reference in sorted(REFERENCE_SAVINGS_MB.items()))
    return FitResult(record_size=record_size, cells=cells)


def saving_grid(record_size: float,
                node_count: int = REFERENCE_NODE_COUNT,
                per_node: int = REFERENCE_PER_NODE_RECORDS) -> dict:
    """Predicted saving grid in MB; None where k >= N (not applicable)."""
    grid: dict[tuple[int, int], float | None] = {}
    for k in REFERENCE_K_VALUES:
        for n_requested in REFERENCE_N_VALUES:
            if k >= n_requested:
                grid[(k, n_requested)] = None
            else:
                saving = analytic_saving(node_count, per_node, n_requested, k,
                                         record_size)
                grid[(k, n_requested)] = saving.reconstruction_bytes / _MB
    return grid


# ---------------------------------------------------------------------------
# topology files


def load_topology(path: str) -> ClusterTopology:
    """Read a topology file (latency in ms, bandwidth in MB/s)."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed topology file: {exc.msg}") from exc
    try:
        nodes = doc["nodes"]
        record_size = int(doc["record_size_bytes"])
        links = doc.get("links", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"topology file missing required fields: {exc}") from exc
    if not isinstance(nodes, list) or not nodes:
        raise ConfigError("topology file must list nodes")
    ids = [node.get("id") for node in nodes]
    n = len(nodes)
    if sorted(ids) != list(range(1, n + 1)):
        raise ConfigError(f"node ids must be 1..{n}, got {ids}")
    by_id = {node["id"]: node for node in nodes}
    latency: list[list[float | None]] = [[None] * n for _ in range(n)]
    bandwidth: list[list[float | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        latency[i][i] = 0.0
    for link in links:
        try:
            a, b = int(link["a"]), int(link["b"])
            lat = float(link["latency_ms"]) / 1e3
            bw_raw = link.get("bandwidth_MBps")
            bw = None if bw_raw is None else float(bw_raw) * 1e6
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed link entry {link!r}") from exc
        if a not in by_id or b not in by_id:
            raise ConfigError(f"link references unknown node: {link!r}")
        latency[a - 1][b - 1] = latency[b - 1][a - 1] = lat
        bandwidth[a - 1][b - 1] = bandwidth[b - 1][a - 1] = bw
    return ClusterTopology(
        node_count=n,
        corpus_sizes=tuple(int(by_id[i + 1].get("records", 0)) for i in range(n)),
        record_size=record_size,
        latency_s=tuple(tuple(row) for row in latency),
        bandwidth_bps=tuple(tuple(row) for row in bandwidth),
        processing_s=tuple(float(by_id[i + 1].get("processing_ms", 0.0)) / 1e3
                           for i in range(n)),
        corpus_paths=tuple(str(by_id[i + 1].get("corpus_path", ""))
                           for i in range(n)),
    )
