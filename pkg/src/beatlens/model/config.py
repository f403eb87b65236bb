"""Architecture hyperparameters for the residual 1D-CNN classifier."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

EMBEDDING_LAYERS = ("input", "flatten", "dense1", "dense2")


@dataclass(frozen=True)
class ModelConfig:
    """Every dimension of the network is a field here, nothing is hard-coded.

    The default mirrors the residual conv family this tool is built around:
    an initial conv, ``conv_blocks`` residual blocks (conv-relu-conv + skip,
    relu, maxpool), then two dense layers and a softmax head.  The embedding
    is read from ``embedding_layer`` (post-activation).
    """

    input_length: int
    num_classes: int = 4
    conv_blocks: int = 5
    filters: int = 32
    kernel_size: int = 5
    pool_size: int = 5
    pool_stride: int = 2
    dense_units: int = 32
    embedding_layer: str = "dense2"
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("input_length", "num_classes", "conv_blocks", "filters",
                     "kernel_size", "pool_size", "pool_stride", "dense_units"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.embedding_layer not in EMBEDDING_LAYERS:
            raise ValueError(
                f"embedding_layer must be one of {EMBEDDING_LAYERS}, got {self.embedding_layer!r}"
            )
        # Each block pools; the signal must survive every pooling stage.
        length = self.input_length
        for _ in range(self.conv_blocks):
            if length < self.pool_size:
                raise ValueError(
                    f"input_length {self.input_length} too short for {self.conv_blocks} "
                    f"pooling stages of size {self.pool_size}"
                )
            length = (length - self.pool_size) // self.pool_stride + 1

    @property
    def pooled_lengths(self) -> tuple[int, ...]:
        """Signal length after each residual block."""
        lengths = []
        length = self.input_length
        for _ in range(self.conv_blocks):
            length = (length - self.pool_size) // self.pool_stride + 1
            lengths.append(length)
        return tuple(lengths)

    @property
    def flatten_dim(self) -> int:
        return self.filters * self.pooled_lengths[-1]

    @property
    def embedding_dim(self) -> int:
        if self.embedding_layer == "input":
            return self.input_length
        if self.embedding_layer == "flatten":
            return self.flatten_dim
        return self.dense_units

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config fields: {sorted(unknown)}")
        return cls(**data)
