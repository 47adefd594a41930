import pytest

from sensorsearch.core import (Polarity, PropertyDef, PropertyRegistry,
                               SensorDescription, canonical_registry)
from sensorsearch.corpus import Corpus, GeneratorConfig


def make_registry(*defs) -> PropertyRegistry:
    """Registry with ad-hoc property definitions: (key, polarity) pairs."""
    registry = PropertyRegistry()
    for key, polarity in defs:
        registry.register(PropertyDef(key=key, unit="", polarity=polarity))
    return registry


def make_sensor(uid, values, sensor_type="temperature", region="canberra"):
    return SensorDescription(uid=uid, sensor_type=sensor_type, region=region,
                             raw_values=dict(values))


@pytest.fixture
def registry():
    return canonical_registry()


@pytest.fixture
def small_corpus():
    """300 seeded sensors over the default 5 properties."""
    return Corpus.from_config(GeneratorConfig(count=300, seed=99))


HIGHER = Polarity.HIGHER_IS_BETTER
LOWER = Polarity.LOWER_IS_BETTER
