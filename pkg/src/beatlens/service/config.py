"""Service configuration: a flat key=value file plus environment overrides.

Precedence, lowest to highest: built-in defaults, the config file named by
EXPLAIN_CONFIG (or passed explicitly), then individual EXPLAIN_* variables.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from typing import Mapping, Optional

from .. import lime
from ..model import load_weights
from ..neighbors import DEFAULT_K, load_index
from ..signals import Beat, ClassLabel, load_dataset
from .engine import ExplainEngine

ENV_PREFIX = "EXPLAIN_"
CONFIG_PATH_VAR = "EXPLAIN_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    weights_path: str = "artifacts/model.blnw"
    index_path: str = "artifacts/train.blni"
    train_path: str = "artifacts/train.csv"
    pool_manifest_path: Optional[str] = None
    pool_dataset_path: Optional[str] = None
    sessions_dir: Optional[str] = None
    host: str = "127.0.0.1"
    port: int = 8000
    k: int = DEFAULT_K
    lime_samples: int = lime.DEFAULT_NUM_SAMPLES
    lime_segments: int = lime.DEFAULT_NUM_SEGMENTS
    lime_seed: int = 0
    saliency_percentile: float = lime.DEFAULT_PERCENTILE
    saliency_min_run: int = lime.DEFAULT_MIN_RUN

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], source: str = "config") -> "ServiceConfig":
        kwargs = {}
        by_name = {f.name: f for f in fields(cls)}
        for key, raw in values.items():
            field = by_name.get(key)
            if field is None:
                raise ConfigError(f"{source}: unknown key {key!r}")
            kwargs[key] = _coerce(field.name, field.type, raw, source)
        return cls(**kwargs)

    def replaced(self, values: Mapping[str, str], source: str) -> "ServiceConfig":
        merged = {f.name: getattr(self, f.name) for f in fields(self)}
        by_name = {f.name: f for f in fields(self)}
        for key, raw in values.items():
            field = by_name.get(key)
            if field is None:
                raise ConfigError(f"{source}: unknown key {key!r}")
            merged[key] = _coerce(field.name, field.type, raw, source)
        return ServiceConfig(**merged)


def _coerce(name: str, annotation: str, raw: str, source: str):
    annotation = str(annotation)
    try:
        if annotation == "int":
            return int(raw)
        if annotation == "float":
            return float(raw)
        if annotation.startswith("Optional"):
            return raw or None
        return raw
    except ValueError:
        raise ConfigError(f"{source}: key {name!r} expects {annotation}, got {raw!r}") from None


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def env_overrides(environ: Mapping[str, str]) -> dict[str, str]:
    known = set(ServiceConfig.field_names())
    out = {}
    for key, value in environ.items():
        if not key.startswith(ENV_PREFIX) or key == CONFIG_PATH_VAR:
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name not in known:
            raise ConfigError(f"environment: unknown variable {key}")
        out[name] = value
    return out


def load_config(path: Optional[str] = None,
                environ: Optional[Mapping[str, str]] = None) -> ServiceConfig:
    environ = os.environ if environ is None else environ
    config = ServiceConfig()
    path = path or environ.get(CONFIG_PATH_VAR)
    if path:
        config = config.replaced(parse_config_file(path), source=path)
    config = config.replaced(env_overrides(environ), source="environment")
    return config


def _load_pool(config: ServiceConfig, test_beats: list[Beat]) -> list[Beat]:
    """The beats offered for probing: a curated manifest, or the whole file."""
    if config.pool_manifest_path is None:
        return test_beats
    with open(config.pool_manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    by_id = {beat.id: beat for beat in test_beats}
    pool = []
    for entry in manifest["beats"]:
        beat = by_id.get(entry["id"])
        if beat is None:
            raise ConfigError(
                f"{config.pool_manifest_path}: beat {entry['id']!r} not in the pool dataset"
            )
        expected = ClassLabel(entry["label"]["code"])
        if beat.label != expected:
            raise ConfigError(
                f"{config.pool_manifest_path}: label mismatch for beat {entry['id']!r}"
            )
        pool.append(beat)
    return pool


def build_engine(config: ServiceConfig, clock=None) -> ExplainEngine:
    """Load the artifacts a config points at and assemble the engine."""
    bundle = load_weights(config.weights_path)
    index = load_index(config.index_path)
    length = bundle.config.input_length
    train = load_dataset(config.train_path, expected_length=length, split="train")
    if config.pool_dataset_path is not None:
        pool_beats = list(load_dataset(config.pool_dataset_path, expected_length=length,
                                       split="test").beats)
    else:
        pool_beats = list(train.beats)
    pool = _load_pool(config, pool_beats)
    return ExplainEngine(
        bundle,
        index,
        train,
        pool,
        k=config.k,
        lime_samples=config.lime_samples,
        lime_segments=config.lime_segments,
        lime_seed=config.lime_seed,
        saliency_percentile=config.saliency_percentile,
        saliency_min_run=config.saliency_min_run,
        clock=clock,
        sessions_dir=config.sessions_dir,
    )
