import numpy as np
import pytest

from beatlens.model import (
    ModelConfig,
    WeightFormatError,
    bundle_fingerprint,
    init_params,
    load_weights,
    save_weights,
)
from beatlens.model.network import ModelBundle

from conftest import SMALL_CONFIG


def fresh_bundle(meta=None, seed=None):
    config = SMALL_CONFIG if seed is None else ModelConfig(**{**SMALL_CONFIG.to_dict(), "seed": seed})
    return ModelBundle(config=config, params=init_params(config), training_meta=meta or {})


def test_round_trip_preserves_bits_and_meta(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    loaded = load_weights(path)
    assert loaded.config == small_bundle.config
    assert loaded.training_meta == small_bundle.training_meta
    for name in small_bundle.params:
        original, reread = small_bundle.params[name], loaded.params[name]
        assert original.dtype == reread.dtype == np.float32
        assert original.tobytes() == reread.tobytes()


def test_fingerprint_survives_round_trip(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    assert load_weights(path).fingerprint == small_bundle.fingerprint


def test_fingerprint_ignores_training_meta():
    a = fresh_bundle(meta={"epochs": 1})
    b = fresh_bundle(meta={"epochs": 99, "note": "different run"})
    assert bundle_fingerprint(a) == bundle_fingerprint(b)


def test_fingerprint_tracks_weights_and_config():
    a = fresh_bundle()
    b = fresh_bundle(seed=12)
    assert bundle_fingerprint(a) != bundle_fingerprint(b)

    nudged = {k: v.copy() for k, v in a.params.items()}
    nudged["dense1/b"][0] += 1.0
    c = ModelBundle(config=a.config, params=nudged, training_meta={})
    assert bundle_fingerprint(a) != bundle_fingerprint(c)


def test_load_rejects_mismatched_caller_config(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    other = ModelConfig(**{**SMALL_CONFIG.to_dict(), "dense_units": 8})
    with pytest.raises(WeightFormatError):
        load_weights(path, config=other)
    assert load_weights(path, config=SMALL_CONFIG).config == SMALL_CONFIG


def test_load_rejects_bad_magic(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    data = bytearray(path.read_bytes())
    data[:4] = b"JUNK"
    path.write_bytes(bytes(data))
    with pytest.raises(WeightFormatError, match="magic"):
        load_weights(path)


def test_load_rejects_truncated_file(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 7])
    with pytest.raises(WeightFormatError, match="truncated"):
        load_weights(path)


def test_load_rejects_flipped_tensor_bytes(tmp_path, small_bundle):
    # Flipping one payload byte must change the loaded weights, never pass silently.
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    data = bytearray(path.read_bytes())
    data[-3] ^= 0xFF
    path.write_bytes(bytes(data))
    loaded = load_weights(path)
    assert loaded.fingerprint != small_bundle.fingerprint


def test_save_is_atomic_no_temp_left_behind(tmp_path, small_bundle):
    path = tmp_path / "model.blnw"
    save_weights(small_bundle, path)
    save_weights(small_bundle, path)  # overwrite in place
    assert [p.name for p in tmp_path.iterdir()] == ["model.blnw"]
