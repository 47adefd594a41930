"""Corpus generation, persistence, and the columnar snapshot store.

Persistence format: line-delimited JSON. The first line is a schema header,
every following line one sensor record. JSON float serialization uses
Python's shortest round-trip repr, so save -> load reproduces every value
exactly.

Generation is fully determined by the GeneratorConfig: one RNG seeded from
config.seed, draws in a fixed documented order (types, regions, then each
property column in listed order), so the same config always produces the same
corpus bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .core import PropertyRegistry, SensorDescription, canonical_registry
from .errors import ConfigError, LoadError, UnknownProperty

SCHEMA_NAME = "sensor-corpus"
SCHEMA_VERSION = 1

DEFAULT_SENSOR_TYPES = ("temperature", "humidity", "pressure", "light", "co2")
DEFAULT_REGIONS = ("canberra", "sydney", "melbourne", "brisbane", "perth")

# first five / first ten keys of the canonical catalogue, the two shapes used
# by the benchmark grids
DEFAULT_KEYS_5 = ("availability", "accuracy", "reliability", "response_time",
                  "frequency")
DEFAULT_KEYS_10 = DEFAULT_KEYS_5 + ("sensitivity", "measurement_range",
                                    "selectivity", "precision", "latency")


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 100.0

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, count)


@dataclass(frozen=True)
class Normal:
    """Gaussian clipped into [lo, hi]."""

    mean: float
    std: float
    lo: float
    hi: float

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.clip(rng.normal(self.mean, self.std, count), self.lo, self.hi)


Distribution = Union[Uniform, Normal]


def _check_weights(weights: tuple[float, ...] | None, pool: tuple[str, ...],
                   name: str) -> None:
    if weights is None:
        return
    if len(weights) != len(pool):
        raise ConfigError(f"{name} must match the pool length")
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise ConfigError(f"{name} must be non-negative with a positive sum")


@dataclass(frozen=True)
class GeneratorConfig:
    count: int
    property_keys: tuple[str, ...] = DEFAULT_KEYS_5
    seed: int = 0
    distributions: Mapping[str, Distribution] = field(default_factory=dict)
    sensor_types: tuple[str, ...] = DEFAULT_SENSOR_TYPES
    regions: tuple[str, ...] = DEFAULT_REGIONS
    type_weights: tuple[float, ...] | None = None
    region_weights: tuple[float, ...] | None = None

    def validate(self) -> None:
        if self.count < 0:
            raise ConfigError(f"count must be non-negative, got {self.count}")
        if not self.property_keys:
            raise ConfigError("property_keys must not be empty")
        if len(set(self.property_keys)) != len(self.property_keys):
            raise ConfigError("property_keys contains duplicates")
        if not self.sensor_types or not self.regions:
            raise ConfigError("sensor_types and regions must not be empty")
        _check_weights(self.type_weights, self.sensor_types, "type_weights")
        _check_weights(self.region_weights, self.regions, "region_weights")
        for key, dist in self.distributions.items():
            if key not in self.property_keys:
                raise ConfigError(f"distribution for unknown property key {key!r}")
            if not isinstance(dist, (Uniform, Normal)):
                raise ConfigError(f"unknown distribution kind for {key!r}: {dist!r}")
            if isinstance(dist, Uniform) and dist.lo > dist.hi:
                raise ConfigError(f"uniform bounds inverted for {key!r}")
            if isinstance(dist, Normal) and (dist.std < 0 or dist.lo > dist.hi):
                raise ConfigError(f"invalid normal parameters for {key!r}")

    def digest(self) -> str:
        blob = repr(self).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_dict(self) -> dict:
        doc: dict = {"count": self.count, "seed": self.seed,
                     "keys": list(self.property_keys),
                     "types": list(self.sensor_types),
                     "regions": list(self.regions)}
        if self.type_weights is not None:
            doc["type_weights"] = list(self.type_weights)
        if self.region_weights is not None:
            doc["region_weights"] = list(self.region_weights)
        if self.distributions:
            dists = {}
            for key in sorted(self.distributions):
                dist = self.distributions[key]
                if isinstance(dist, Uniform):
                    dists[key] = {"kind": "uniform", "lo": dist.lo, "hi": dist.hi}
                else:
                    dists[key] = {"kind": "normal", "mean": dist.mean,
                                  "std": dist.std, "lo": dist.lo, "hi": dist.hi}
            doc["distributions"] = dists
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GeneratorConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("generator config must be an object")
        known = {"count", "seed", "keys", "types", "regions", "type_weights",
                 "region_weights", "distributions"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown generator config fields: {sorted(unknown)}")
        try:
            distributions = {}
            for key, spec in dict(doc.get("distributions", {})).items():
                kind = spec.get("kind")
                if kind == "uniform":
                    distributions[key] = Uniform(lo=float(spec.get("lo", 0.0)),
                                                 hi=float(spec.get("hi", 100.0)))
                elif kind == "normal":
                    distributions[key] = Normal(mean=float(spec["mean"]),
                                                std=float(spec["std"]),
                                                lo=float(spec.get("lo", 0.0)),
                                                hi=float(spec.get("hi", 100.0)))
                else:
                    raise ConfigError(f"unknown distribution kind for {key!r}: "
                                      f"{kind!r}")
            config = cls(
                count=int(doc.get("count", 0)),
                property_keys=tuple(doc.get("keys", DEFAULT_KEYS_5)),
                seed=int(doc.get("seed", 0)),
                distributions=distributions,
                sensor_types=tuple(doc.get("types", DEFAULT_SENSOR_TYPES)),
                regions=tuple(doc.get("regions", DEFAULT_REGIONS)),
                type_weights=(tuple(float(w) for w in doc["type_weights"])
                              if doc.get("type_weights") is not None else None),
                region_weights=(tuple(float(w) for w in doc["region_weights"])
                                if doc.get("region_weights") is not None else None),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, AttributeError) as exc:
            raise ConfigError(f"malformed generator config: {exc}") from exc
        config.validate()
        return config


def _uid_width(count: int) -> int:
    return max(1, len(str(count - 1))) if count > 0 else 1


def generate_columns(config: GeneratorConfig) -> tuple[np.ndarray, np.ndarray,
                                                       np.ndarray,
                                                       dict[str, np.ndarray]]:
    """Draw a corpus as columns: (uids, sensor_types, regions, {key: values})."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    count = config.count
    width = _uid_width(count)
    uids = np.array([f"s{i:0{width}d}" for i in range(count)])

    def _pick(pool: tuple[str, ...], weights: tuple[float, ...] | None):
        p = None
        if weights is not None:
            p = np.asarray(weights, dtype=float)
            p = p / p.sum()
        return rng.choice(np.array(pool), size=count, p=p)

    types = _pick(config.sensor_types, config.type_weights)
    regions = _pick(config.regions, config.region_weights)
    columns: dict[str, np.ndarray] = {}
    for key in config.property_keys:
        dist = config.distributions.get(key, Uniform())
        columns[key] = dist.sample(rng, count)
    if count == 0:
        types = np.array([], dtype="<U1")
        regions = np.array([], dtype="<U1")
        uids = np.array([], dtype="<U1")
    return uids, types, regions, columns


def generate(config: GeneratorConfig) -> list[SensorDescription]:
    """Materialize the generated corpus as sensor records in uid order."""
    uids, types, regions, columns = generate_columns(config)
    keys = config.property_keys
    return [
        SensorDescription(
            uid=str(uids[i]),
            sensor_type=str(types[i]),
            region=str(regions[i]),
            raw_values={key: float(columns[key][i]) for key in keys},
        )
        for i in range(config.count)
    ]


class Corpus:
    """Immutable columnar snapshot of a sensor collection, sorted by uid.

    Numeric columns hold NaN where a sensor lacks the property, which makes
    vectorized comparisons exclude those sensors for free. Normalized columns
    are cached per property and invalidated by the registry bounds version.
    """

    def __init__(self, registry: PropertyRegistry, uids: np.ndarray,
                 sensor_types: np.ndarray, regions: np.ndarray,
                 columns: dict[str, np.ndarray], snapshot_id: str | None = None,
                 register: bool = True):
        order = np.argsort(uids, kind="stable")
        self.registry = registry
        self.uids = uids[order]
        self.sensor_types = sensor_types[order]
        self.regions = regions[order]
        self.columns = {key: col[order] for key, col in columns.items()}
        if len(self.uids) != len(set(self.uids.tolist())):
            raise ValueError("duplicate sensor uid in corpus")
        for key in self.columns:
            registry.get(key)
        if register:
            for key, col in self.columns.items():
                finite = col[~np.isnan(col)]
                if finite.size:
                    registry.register_observation(key, float(finite.min()))
                    registry.register_observation(key, float(finite.max()))
        self.snapshot_id = snapshot_id or self._content_digest()
        self._norm_cache: dict[str, tuple[int, np.ndarray]] = {}
        self._uid_index: dict[str, int] | None = None

    @classmethod
    def from_sensors(cls, sensors: Iterable[SensorDescription],
                     registry: PropertyRegistry, register: bool = True,
                     snapshot_id: str | None = None) -> "Corpus":
        sensors = list(sensors)
        keys: list[str] = []
        for sensor in sensors:
            for key in sensor.raw_values:
                if key not in keys:
                    keys.append(key)
        n = len(sensors)
        uids = np.array([s.uid for s in sensors]) if n else np.array([], dtype="<U1")
        types = np.array([s.sensor_type for s in sensors]) if n else np.array([], dtype="<U1")
        regions = np.array([s.region for s in sensors]) if n else np.array([], dtype="<U1")
        columns = {}
        for key in keys:
            col = np.full(n, np.nan)
            for i, sensor in enumerate(sensors):
                value = sensor.raw_values.get(key)
                if value is not None:
                    col[i] = value
            columns[key] = col
        return cls(registry, uids, types, regions, columns,
                   snapshot_id=snapshot_id, register=register)

    @classmethod
    def from_config(cls, config: GeneratorConfig,
                    registry: PropertyRegistry | None = None) -> "Corpus":
        registry = registry if registry is not None else canonical_registry()
        uids, types, regions, columns = generate_columns(config)
        return cls(registry, uids, types, regions, columns,
                   snapshot_id=config.digest())

    def _content_digest(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.uids.tobytes())
        digest.update(self.sensor_types.tobytes())
        digest.update(self.regions.tobytes())
        for key in sorted(self.columns):
            digest.update(key.encode())
            digest.update(self.columns[key].tobytes())
        return digest.hexdigest()

    def __len__(self) -> int:
        return len(self.uids)

    def normalized_column(self, key: str) -> np.ndarray:
        """Normalized values for key; NaN where the sensor lacks the property."""
        version = self.registry.bounds_version(key)
        cached = self._norm_cache.get(key)
        if cached is not None and cached[0] == version:
            return cached[1]
        prop = self.registry.get(key)
        col = self.columns.get(key)
        if col is None:
            col = np.full(len(self.uids), np.nan)
        lo, hi = prop.observed_min, prop.observed_max
        if lo is None or hi == lo:
            normalized = np.where(np.isnan(col), np.nan, 0.5)
        else:
            normalized = (col - lo) / (hi - lo)
        self._norm_cache[key] = (version, normalized)
        return normalized

    def sensor_at(self, index: int) -> SensorDescription:
        raw = {}
        for key, col in self.columns.items():
            value = col[index]
            if not np.isnan(value):
                raw[key] = float(value)
        return SensorDescription(uid=str(self.uids[index]),
                                 sensor_type=str(self.sensor_types[index]),
                                 region=str(self.regions[index]),
                                 raw_values=raw)

    def sensors(self) -> list[SensorDescription]:
        return [self.sensor_at(i) for i in range(len(self))]

    def index_of(self, uid: str) -> int | None:
        if self._uid_index is None:
            self._uid_index = {str(u): i for i, u in enumerate(self.uids)}
        return self._uid_index.get(uid)

    @property
    def property_keys(self) -> tuple[str, ...]:
        return tuple(self.columns.keys())

    def split(self, parts: int) -> list["Corpus"]:
        return split(self, parts)


def save(sensors: Union[Corpus, Iterable[SensorDescription]], path: str) -> str:
    """Write a corpus file; returns the sha256 checksum of the bytes written."""
    if isinstance(sensors, Corpus):
        records: Iterable[SensorDescription] = (sensors.sensor_at(i)
                                                for i in range(len(sensors)))
    else:
        records = sensors
    digest = hashlib.sha256()
    with open(path, "w", encoding="utf-8") as handle:
        header = json.dumps({"schema": SCHEMA_NAME, "version": SCHEMA_VERSION}) + "\n"
        handle.write(header)
        digest.update(header.encode())
        for sensor in records:
            line = json.dumps({
                "uid": sensor.uid,
                "sensor_type": sensor.sensor_type,
                "region": sensor.region,
                "raw_values": dict(sensor.raw_values),
            }) + "\n"
            handle.write(line)
            digest.update(line.encode())
    return digest.hexdigest()


def load(path: str, registry: PropertyRegistry | None = None) -> Corpus:
    """Read a corpus file into a columnar snapshot, validating every line.

    With no registry given, a fresh canonical registry is used so observed
    bounds reflect only this corpus.
    """
    registry = registry if registry is not None else canonical_registry()
    sensors: list[SensorDescription] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        header_line = handle.readline()
        if not header_line.strip():
            raise LoadError(1, "missing schema header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise LoadError(1, f"malformed header: {exc.msg}") from exc
        if not isinstance(header, dict) or header.get("schema") != SCHEMA_NAME:
            raise LoadError(1, f"not a {SCHEMA_NAME} file")
        if header.get("version") != SCHEMA_VERSION:
            raise LoadError(1, f"unsupported schema version {header.get('version')!r}")
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(lineno, f"malformed record: {exc.msg}") from exc
            sensors.append(_record_to_sensor(record, lineno, registry, seen))
    return Corpus.from_sensors(sensors, registry)


def _record_to_sensor(record: object, lineno: int, registry: PropertyRegistry,
                      seen: set[str]) -> SensorDescription:
    if not isinstance(record, dict):
        raise LoadError(lineno, "record is not an object")
    try:
        uid = record["uid"]
        sensor_type = record["sensor_type"]
        region = record["region"]
        raw_values = record["raw_values"]
    except KeyError as exc:
        raise LoadError(lineno, f"missing field {exc.args[0]!r}") from exc
    if not isinstance(uid, str) or not isinstance(sensor_type, str) \
            or not isinstance(region, str) or not isinstance(raw_values, dict):
        raise LoadError(lineno, "field has wrong type")
    if uid in seen:
        raise LoadError(lineno, f"duplicate uid {uid!r}")
    seen.add(uid)
    values: dict[str, float] = {}
    for key, value in raw_values.items():
        if key not in registry:
            raise UnknownProperty(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise LoadError(lineno, f"non-numeric value for {key!r}")
        values[key] = float(value)
    return SensorDescription(uid=uid, sensor_type=sensor_type, region=region,
                             raw_values=values)


def split(corpus: Corpus, parts: int) -> list[Corpus]:
    """Partition a corpus round-robin into disjoint parts sharing the registry."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    pieces = []
    for offset in range(parts):
        index = np.arange(offset, len(corpus), parts)
        pieces.append(Corpus(
            corpus.registry,
            corpus.uids[index],
            corpus.sensor_types[index],
            corpus.regions[index],
            {key: col[index] for key, col in corpus.columns.items()},
            snapshot_id=f"{corpus.snapshot_id}:part{offset + 1}of{parts}",
            register=False,
        ))
    return pieces
