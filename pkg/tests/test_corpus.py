"""Generator determinism, persistence round trips, and corpus splitting."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sensorsearch.core import canonical_registry
from sensorsearch.corpus import (Corpus, GeneratorConfig, Normal, Uniform,
                                 generate, load, save, split)
from sensorsearch.errors import ConfigError, LoadError, UnknownProperty

from conftest import HIGHER, make_registry, make_sensor


class TestGenerator:
    def test_count_zero(self):
        assert generate(GeneratorConfig(count=0)) == []

    def test_determinism(self):
        a = generate(GeneratorConfig(count=50, seed=42))
        b = generate(GeneratorConfig(count=50, seed=42))
        assert a == b

    def test_different_seeds_differ(self):
        a = generate(GeneratorConfig(count=50, seed=1))
        b = generate(GeneratorConfig(count=50, seed=2))
        assert a != b

    def test_uid_format_zero_padded(self):
        sensors = generate(GeneratorConfig(count=101, seed=0))
        assert sensors[0].uid == "s000"
        assert sensors[100].uid == "s100"
        assert len({s.uid for s in sensors}) == 101

    def test_uniform_mean_lln_bound(self):
        # four standard errors of the mean of uniform[0,100] over 1e5 draws:
        # 4 * (100 / sqrt(12)) / sqrt(1e5) = 0.365
        config = GeneratorConfig(count=100_000, seed=7,
                                 property_keys=("accuracy",))
        corpus = Corpus.from_config(config)
        bound = 4 * (100 / math.sqrt(12)) / math.sqrt(100_000)
        assert abs(float(corpus.columns["accuracy"].mean()) - 50.0) <= bound

    def test_normal_distribution_clipped(self):
        config = GeneratorConfig(
            count=2000, seed=3, property_keys=("accuracy",),
            distributions={"accuracy": Normal(mean=50, std=40, lo=20, hi=60)})
        corpus = Corpus.from_config(config)
        col = corpus.columns["accuracy"]
        assert float(col.min()) >= 20.0 and float(col.max()) <= 60.0

    def test_weighted_type_pool(self):
        config = GeneratorConfig(
            count=4000, seed=5, sensor_types=("a", "b"),
            type_weights=(9.0, 1.0))
        corpus = Corpus.from_config(config)
        share_a = float((corpus.sensor_types == "a").mean())
        assert 0.85 <= share_a <= 0.95

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            GeneratorConfig(count=-1).validate()
        with pytest.raises(ConfigError):
            GeneratorConfig(count=1, property_keys=()).validate()
        with pytest.raises(ConfigError):
            GeneratorConfig(count=1, property_keys=("a", "a")).validate()
        with pytest.raises(ConfigError):
            GeneratorConfig(count=1, distributions={"other": Uniform()}).validate()
        with pytest.raises(ConfigError):
            GeneratorConfig(
                count=1, property_keys=("a",),
                distributions={"a": Uniform(lo=5, hi=1)}).validate()
        with pytest.raises(ConfigError):
            GeneratorConfig(count=1, sensor_types=("x",),
                            type_weights=(1.0, 2.0)).validate()

    def test_declarative_document_round_trip(self):
        config = GeneratorConfig(
            count=10, seed=4, property_keys=("accuracy", "latency"),
            distributions={"latency": Normal(mean=5, std=2, lo=0, hi=10)},
            sensor_types=("a", "b"), type_weights=(2.0, 1.0))
        assert GeneratorConfig.from_dict(config.to_dict()) == config

    def test_declarative_document_rejects_unknown_fields(self):
        with pytest.raises(ConfigError):
            GeneratorConfig.from_dict({"count": 1, "bogus": True})

    @given(st.integers(min_value=0, max_value=2**63 - 1))
    @settings(max_examples=25)
    def test_any_seed_is_deterministic(self, seed):
        config = GeneratorConfig(count=8, seed=seed)
        assert generate(config) == generate(config)


class TestPersistence:
    def test_round_trip_exact(self, tmp_path):
        corpus = Corpus.from_config(GeneratorConfig(count=200, seed=13))
        path = tmp_path / "c.jsonl"
        save(corpus, str(path))
        loaded = load(str(path))
        assert len(loaded) == len(corpus)
        assert loaded.uids.tolist() == corpus.uids.tolist()
        for key in corpus.columns:
            assert loaded.columns[key].tolist() == corpus.columns[key].tolist()
        assert loaded.sensor_types.tolist() == corpus.sensor_types.tolist()
        assert loaded.regions.tolist() == corpus.regions.tolist()

    def test_empty_round_trip(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        save([], str(path))
        assert len(load(str(path))) == 0

    def test_save_checksum_is_stable(self, tmp_path):
        corpus = Corpus.from_config(GeneratorConfig(count=20, seed=1))
        digest_a = save(corpus, str(tmp_path / "a.jsonl"))
        digest_b = save(corpus, str(tmp_path / "b.jsonl"))
        assert digest_a == digest_b

    def test_header_validation(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"schema": "something-else", "version": 1}\n')
        with pytest.raises(LoadError) as info:
            load(str(path))
        assert info.value.line == 1

    def test_malformed_record_line_number(self, tmp_path):
        corpus = Corpus.from_config(GeneratorConfig(count=10, seed=2))
        path = tmp_path / "trunc.jsonl"
        save(corpus, str(path))
        lines = path.read_text().splitlines()
        lines[6] = lines[6][: len(lines[6]) // 2]  # truncate record at line 7
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(LoadError) as info:
            load(str(path))
        assert info.value.line == 7

    def test_duplicate_uid_rejected(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        save([make_sensor("s0", {"a": 1.0})] * 2, str(path))
        with pytest.raises(LoadError):
            load(str(path), make_registry(("a", HIGHER)))

    def test_unknown_property_rejected(self, tmp_path):
        path = tmp_path / "unknown.jsonl"
        save([make_sensor("s0", {"mystery": 1.0})], str(path))
        with pytest.raises(UnknownProperty):
            load(str(path), make_registry(("a", HIGHER)))

    def test_non_numeric_value_rejected(self, tmp_path):
        path = tmp_path / "nonnum.jsonl"
        header = {"schema": "sensor-corpus", "version": 1}
        record = {"uid": "s0", "sensor_type": "t", "region": "r",
                  "raw_values": {"accuracy": "high"}}
        path.write_text(json.dumps(header) + "\n" + json.dumps(record) + "\n")
        with pytest.raises(LoadError) as info:
            load(str(path))
        assert info.value.line == 2


class TestCorpus:
    def test_sorted_by_uid(self):
        registry = make_registry(("a", HIGHER))
        sensors = [make_sensor("s2", {"a": 1.0}), make_sensor("s0", {"a": 2.0}),
                   make_sensor("s1", {"a": 3.0})]
        corpus = Corpus.from_sensors(sensors, registry)
        assert corpus.uids.tolist() == ["s0", "s1", "s2"]

    def test_duplicate_uid_rejected(self):
        registry = make_registry(("a", HIGHER))
        sensors = [make_sensor("s0", {"a": 1.0}), make_sensor("s0", {"a": 2.0})]
        with pytest.raises(ValueError):
            Corpus.from_sensors(sensors, registry)

    def test_registers_bounds(self):
        registry = make_registry(("a", HIGHER))
        Corpus.from_sensors([make_sensor("s0", {"a": 3.0}),
                             make_sensor("s1", {"a": 9.0})], registry)
        prop = registry.get("a")
        assert (prop.observed_min, prop.observed_max) == (3.0, 9.0)

    def test_normalized_column_cache_invalidation(self):
        registry = make_registry(("a", HIGHER))
        corpus = Corpus.from_sensors([make_sensor("s0", {"a": 0.0}),
                                      make_sensor("s1", {"a": 10.0})], registry)
        before = corpus.normalized_column("a")
        assert before.tolist() == [0.0, 1.0]
        registry.register_observation("a", 20.0)  # widen: cache must refresh
        after = corpus.normalized_column("a")
        assert after.tolist() == [0.0, 0.5]

    def test_snapshot_id_reflects_content(self):
        registry = make_registry(("a", HIGHER))
        a = Corpus.from_sensors([make_sensor("s0", {"a": 1.0})], registry,
                                register=False)
        b = Corpus.from_sensors([make_sensor("s0", {"a": 2.0})], registry,
                                register=False)
        assert a.snapshot_id != b.snapshot_id

    def test_config_digest_is_snapshot_id(self):
        config = GeneratorConfig(count=5, seed=9)
        assert Corpus.from_config(config).snapshot_id == config.digest()


class TestSplit:
    def test_partition_laws(self):
        corpus = Corpus.from_config(GeneratorConfig(count=103, seed=21))
        parts = split(corpus, 4)
        assert len(parts) == 4
        all_uids = sorted(uid for part in parts for uid in part.uids.tolist())
        assert all_uids == corpus.uids.tolist()
        seen: set[str] = set()
        for part in parts:
            uids = set(part.uids.tolist())
            assert not (uids & seen)
            seen |= uids

    def test_parts_share_registry(self):
        corpus = Corpus.from_config(GeneratorConfig(count=20, seed=1))
        parts = corpus.split(3)
        assert all(part.registry is corpus.registry for part in parts)

    def test_deterministic(self):
        corpus = Corpus.from_config(GeneratorConfig(count=50, seed=5))
        first = [part.uids.tolist() for part in split(corpus, 3)]
        second = [part.uids.tolist() for part in split(corpus, 3)]
        assert first == second
