"""Self-describing binary weight files.

Layout (all integers little-endian):

    magic   4 bytes  b"BLNW"
    version u32
    u32 length + UTF-8 JSON model config
    u32 length + UTF-8 JSON training meta
    u32 tensor count
    per tensor: u16 name length, name, u8 ndim, u32 dims..., float32 data

Weights are stored as little-endian float32; loading a file written from a
float32 model reproduces forward outputs bit-identically.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from pathlib import Path
from typing import BinaryIO, Optional

import numpy as np

from .config import ModelConfig
from .network import ModelBundle, expected_param_shapes

MAGIC = b"BLNW"
FORMAT_VERSION = 1


class WeightFormatError(ValueError):
    """Raised for unreadable, truncated, or inconsistent weight files."""


def _write_block(fh: BinaryIO, payload: bytes) -> None:
    fh.write(struct.pack("<I", len(payload)))
    fh.write(payload)


def _read_exact(fh: BinaryIO, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise WeightFormatError(f"{what}: file truncated")
    return data


def serialize_bundle(bundle: ModelBundle) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    _write_block(buf, json.dumps(bundle.config.to_dict(), sort_keys=True).encode("utf-8"))
    _write_block(buf, json.dumps(bundle.training_meta, sort_keys=True).encode("utf-8"))
    names = sorted(bundle.params)
    buf.write(struct.pack("<I", len(names)))
    for name in names:
        tensor = np.ascontiguousarray(bundle.params[name], dtype="<f4")
        encoded = name.encode("utf-8")
        buf.write(struct.pack("<H", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<B", tensor.ndim))
        for dim in tensor.shape:
            buf.write(struct.pack("<I", dim))
        buf.write(tensor.tobytes())
    return buf.getvalue()


def bundle_fingerprint(bundle: ModelBundle) -> str:
    """Hash of config + weights (not training meta): identifies forward behavior."""
    digest = hashlib.sha256()
    digest.update(json.dumps(bundle.config.to_dict(), sort_keys=True).encode("utf-8"))
    for name in sorted(bundle.params):
        tensor = np.ascontiguousarray(bundle.params[name], dtype="<f4")
        digest.update(name.encode("utf-8"))
        digest.update(str(tensor.shape).encode("utf-8"))
        digest.update(tensor.tobytes())
    return digest.hexdigest()


def save_weights(bundle: ModelBundle, path: str | Path) -> None:
    path = Path(path)
    payload = serialize_bundle(bundle)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)


def load_weights(path: str | Path, config: Optional[ModelConfig] = None) -> ModelBundle:
    """Load a bundle; the config embedded in the file is authoritative.

    A caller-supplied config is only checked for consistency and rejected on
    mismatch.  Every tensor is validated against the shapes the embedded
    config implies, naming the offending layer.
    """
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise WeightFormatError(f"{path.name}: not a weight file (bad magic)")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "header"))
        if version != FORMAT_VERSION:
            raise WeightFormatError(
                f"{path.name}: format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        (config_len,) = struct.unpack("<I", _read_exact(fh, 4, "config block"))
        file_config = ModelConfig.from_dict(json.loads(_read_exact(fh, config_len, "config block")))
        if config is not None and config != file_config:
            raise WeightFormatError(
                f"{path.name}: caller config is inconsistent with the config embedded in the file"
            )
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, "meta block"))
        meta = json.loads(_read_exact(fh, meta_len, "meta block"))
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "tensor count"))

        expected = expected_param_shapes(file_config)
        params: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "tensor name"))
            name = _read_exact(fh, name_len, "tensor name").decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(fh, 1, f"layer {name!r}"))
            shape = tuple(
                struct.unpack("<I", _read_exact(fh, 4, f"layer {name!r}"))[0] for _ in range(ndim)
            )
            if name not in expected:
                raise WeightFormatError(f"{path.name}: unexpected tensor {name!r}")
            if shape != expected[name]:
                raise WeightFormatError(
                    f"{path.name}: layer {name!r} has shape {shape}, config implies {expected[name]}"
                )
            size = int(np.prod(shape, dtype=np.int64)) if shape else 1
            raw = _read_exact(fh, size * 4, f"layer {name!r}")
            params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
        missing = sorted(set(expected) - set(params))
        if missing:
            raise WeightFormatError(f"{path.name}: missing tensors {missing}")
    return ModelBundle(config=file_config, params=params, training_meta=meta)
