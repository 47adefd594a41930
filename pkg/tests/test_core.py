"""Property registry, observation-driven bounds, and normalization."""

import pytest
from hypothesis import given, strategies as st

from sensorsearch.core import (Polarity, PropertyDef, PropertyRegistry,
                               canonical_registry, normalized_vector)
from sensorsearch.errors import (MissingProperty, OutOfBounds,
                                 UnknownProperty)

from conftest import HIGHER, LOWER, make_registry, make_sensor
from oracles import oracle_bounds, oracle_normalize

CANONICAL_KEYS = (
    "availability", "accuracy", "reliability", "response_time", "frequency",
    "sensitivity", "measurement_range", "selectivity", "precision", "latency",
    "drift", "resolution", "detection_limit", "operating_power_range",
    "sensor_lifetime", "battery_life", "security", "accessibility",
    "robustness", "exception_handling", "interoperability", "configurability",
    "user_satisfaction_rating", "capacity", "throughput",
    "cost_of_data_transmission", "cost_of_data_generation",
    "data_ownership_cost", "bandwidth", "trust",
)

LOWER_IS_BETTER_KEYS = {
    "response_time", "latency", "drift", "detection_limit",
    "operating_power_range", "cost_of_data_transmission",
    "cost_of_data_generation", "data_ownership_cost",
}


class TestCanonicalCatalogue:
    def test_thirty_properties_in_order(self):
        registry = canonical_registry()
        assert registry.keys() == CANONICAL_KEYS
        assert len(registry) == 30

    def test_polarities(self):
        registry = canonical_registry()
        for key in CANONICAL_KEYS:
            expected = (Polarity.LOWER_IS_BETTER
                        if key in LOWER_IS_BETTER_KEYS
                        else Polarity.HIGHER_IS_BETTER)
            assert registry.get(key).polarity is expected, key

    def test_fresh_registry_has_no_bounds(self):
        registry = canonical_registry()
        prop = registry.get("accuracy")
        assert prop.observed_min is None and prop.observed_max is None

    def test_independent_instances(self):
        a = canonical_registry()
        b = canonical_registry()
        a.register_observation("accuracy", 10.0)
        assert b.get("accuracy").observed_min is None


class TestRegistry:
    def test_unknown_property(self):
        registry = make_registry(("a", HIGHER))
        with pytest.raises(UnknownProperty):
            registry.get("nope")
        with pytest.raises(UnknownProperty):
            registry.register_observation("nope", 1.0)
        with pytest.raises(UnknownProperty):
            registry.normalize("nope", 1.0)

    def test_observation_widens_both_directions(self):
        registry = make_registry(("a", HIGHER))
        registry.register_observation("a", 10.0)
        registry.register_observation("a", 5.0)
        registry.register_observation("a", 20.0)
        prop = registry.get("a")
        assert (prop.observed_min, prop.observed_max) == (5.0, 20.0)

    def test_bounds_version_bumps_only_on_change(self):
        registry = make_registry(("a", HIGHER))
        v0 = registry.bounds_version("a")
        registry.register_observation("a", 10.0)
        v1 = registry.bounds_version("a")
        assert v1 != v0
        registry.register_observation("a", 10.0)  # inside bounds, no change
        assert registry.bounds_version("a") == v1
        registry.register_observation("a", 7.0)
        assert registry.bounds_version("a") != v1


class TestNormalize:
    def test_frozen_examples(self):
        registry = make_registry(("a", HIGHER))
        registry.register_observation("a", 0.0)
        registry.register_observation("a", 100.0)
        assert registry.normalize("a", 50.0) == 0.5

        registry2 = make_registry(("a", HIGHER))
        registry2.register_observation("a", 0.0)
        registry2.register_observation("a", 200.0)
        assert registry2.normalize("a", 50.0) == 0.25

    def test_degenerate_bounds_map_to_half(self):
        registry = make_registry(("a", HIGHER))
        registry.register_observation("a", 7.0)
        assert registry.normalize("a", 7.0) == 0.5

    def test_out_of_bounds(self):
        registry = make_registry(("a", HIGHER))
        with pytest.raises(OutOfBounds):
            registry.normalize("a", 1.0)  # no observations yet
        registry.register_observation("a", 0.0)
        registry.register_observation("a", 10.0)
        with pytest.raises(OutOfBounds):
            registry.normalize("a", -0.001)
        with pytest.raises(OutOfBounds):
            registry.normalize("a", 10.001)

    def test_extremes_map_to_unit_interval_ends(self):
        registry = make_registry(("a", HIGHER))
        registry.register_observation("a", 3.0)
        registry.register_observation("a", 17.0)
        assert registry.normalize("a", 3.0) == 0.0
        assert registry.normalize("a", 17.0) == 1.0

    def test_polarity_does_not_flip_normalization(self):
        # polarity matters to ideals and pruning, not to the raw mapping
        registry = make_registry(("lat", LOWER))
        registry.register_observation("lat", 0.0)
        registry.register_observation("lat", 100.0)
        assert registry.normalize("lat", 25.0) == 0.25


class TestNormalizedVector:
    def test_vector_over_keys(self):
        registry = make_registry(("a", HIGHER), ("b", LOWER))
        for value in (0.0, 100.0):
            registry.register_observation("a", value)
            registry.register_observation("b", value)
        sensor = make_sensor("s0", {"a": 50.0, "b": 100.0})
        vec = normalized_vector(registry, sensor, ("a", "b"))
        assert vec.values == {"a": 0.5, "b": 1.0}

    def test_missing_property(self):
        registry = make_registry(("a", HIGHER), ("b", HIGHER))
        registry.register_observation("a", 0.0)
        registry.register_observation("b", 0.0)
        sensor = make_sensor("s0", {"a": 0.0})
        with pytest.raises(MissingProperty):
            normalized_vector(registry, sensor, ("a", "b"))


class TestPropertyDef:
    def test_bounds_must_pair(self):
        with pytest.raises(ValueError):
            PropertyDef(key="a", unit="", polarity=Polarity.HIGHER_IS_BETTER,
                        observed_min=1.0, observed_max=None)

    def test_inverted_bounds_rejected(self):
        with pytest.raises(ValueError):
            PropertyDef(key="a", unit="", polarity=Polarity.HIGHER_IS_BETTER,
                        observed_min=2.0, observed_max=1.0)


@given(st.lists(st.floats(min_value=-1e9, max_value=1e9,
                          allow_nan=False), min_size=1, max_size=40),
       st.data())
def test_normalize_agrees_with_oracle(observations, data):
    registry = make_registry(("a", HIGHER))
    for value in observations:
        registry.register_observation("a", value)
    lo, hi = oracle_bounds(observations)
    prop = registry.get("a")
    assert (prop.observed_min, prop.observed_max) == (lo, hi)
    probe = data.draw(st.floats(min_value=lo, max_value=hi, allow_nan=False))
    assert registry.normalize("a", probe) == oracle_normalize(probe, lo, hi)


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
                min_size=2, max_size=30))
def test_renormalization_consistency(observations):
    # incremental widening ends at the same bounds as a from-scratch pass
    incremental = make_registry(("a", HIGHER))
    for value in observations:
        incremental.register_observation("a", value)
    fresh = make_registry(("a", HIGHER))
    lo, hi = oracle_bounds(observations)
    fresh.register_observation("a", lo)
    fresh.register_observation("a", hi)
    for probe in observations:
        assert incremental.normalize("a", probe) == fresh.normalize("a", probe)
