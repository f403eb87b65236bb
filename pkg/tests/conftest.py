"""Shared miniature fixtures.

A 64-sample corpus and a two-block model keep every non-acceptance test
fast; the acceptance suite builds the full-size corpus itself.
"""

from __future__ import annotations

import pytest

from beatlens.model import ModelConfig, TrainParams, train
from beatlens.neighbors import build_index
from beatlens.synth import SynthSpec, generate_split

SMALL_LENGTH = 64
SMALL_SPEC = SynthSpec(length=SMALL_LENGTH)
SMALL_CONFIG = ModelConfig(input_length=SMALL_LENGTH, conv_blocks=2, filters=8,
                           dense_units=16, seed=3)


@pytest.fixture(scope="session")
def small_train():
    return generate_split(80, "train", seed=1, spec=SMALL_SPEC)


@pytest.fixture(scope="session")
def small_test():
    return generate_split(24, "test", seed=2, spec=SMALL_SPEC)


@pytest.fixture(scope="session")
def small_bundle(small_train):
    return train(small_train, SMALL_CONFIG, epochs=2, hyper=TrainParams(batch_size=16))


@pytest.fixture(scope="session")
def small_index(small_bundle, small_train):
    return build_index(small_bundle, small_train)
