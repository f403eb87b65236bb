"""Embedding index over training beats and exact nearest-neighbor explanations.

The index is a dense brute-force scan: at these sizes (<= 1e5 entries of
dim 32) an exact scan runs in milliseconds and keeps results trivially
comparable against an enumeration oracle.  All tie-breaks are pinned:
equal distances order by beat id, histogram ties by class code, majority
ties by summed distance then class code.
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model.network import Embedding, ModelBundle
from .signals import ClassLabel, Dataset

DEFAULT_K = 50

INDEX_MAGIC = b"BLNI"
INDEX_FORMAT_VERSION = 1


class IndexFormatError(ValueError):
    """Unreadable or truncated index file."""


class FingerprintMismatchError(RuntimeError):
    """Index was built by a different model than the one serving queries."""


@dataclass(frozen=True)
class EmbeddingIndex:
    ids: tuple[str, ...]
    labels: np.ndarray  # uint8 class codes
    vectors: np.ndarray  # (n, dim) float32
    model_fingerprint: str

    def __post_init__(self) -> None:
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if not (len(self.ids) == labels.size == vectors.shape[0]):
            raise ValueError("ids, labels, and vectors must have matching lengths")
        vectors.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class Neighbor:
    beat_id: str
    distance: float
    label: ClassLabel
    rank: int


@dataclass(frozen=True)
class NeighborSet:
    query_ref: str
    k: int
    neighbors: tuple[Neighbor, ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def labels(self) -> list[ClassLabel]:
        return [n.label for n in self.neighbors]

    def ids(self) -> list[str]:
        return [n.beat_id for n in self.neighbors]


@dataclass(frozen=True)
class ClassHistogram:
    """(label, count) bins ordered by count descending, ties by class code."""

    bins: tuple[tuple[ClassLabel, int], ...]

    def total(self) -> int:
        return sum(count for _, count in self.bins)


def build_index(bundle: ModelBundle, train: Dataset, batch_size: int = 512) -> EmbeddingIndex:
    """Embed every training beat with the bundle's configured embedding layer."""
    if train.split != "train":
        raise ValueError(f"index is built over the train split, got {train.split!r}")
    if len(train) == 0:
        raise ValueError("cannot index an empty dataset")
    x = np.stack([beat.samples for beat in train.beats])
    chunks = []
    for start in range(0, x.shape[0], batch_size):
        chunks.append(np.asarray(bundle.embed_batch(x[start : start + batch_size]), dtype=np.float32))
    vectors = np.concatenate(chunks, axis=0)
    if vectors.shape[1] != bundle.embedding_dim:
        raise RuntimeError(
            f"embedding dimension {vectors.shape[1]} disagrees with config {bundle.embedding_dim}"
        )
    labels = np.array([int(beat.label) for beat in train.beats], dtype=np.uint8)
    ids = tuple(beat.id for beat in train.beats)
    return EmbeddingIndex(ids=ids, labels=labels, vectors=vectors, model_fingerprint=bundle.fingerprint)


def verify_fingerprint(index: EmbeddingIndex, bundle: ModelBundle) -> None:
    if index.model_fingerprint != bundle.fingerprint:
        raise FingerprintMismatchError(
            "index fingerprint does not match the serving model; rebuild the index "
            f"(index {index.model_fingerprint[:12]}..., model {bundle.fingerprint[:12]}...)"
        )


def query_neighbors(index: EmbeddingIndex, embedding: Embedding | np.ndarray | Sequence[float],
                    k: int = DEFAULT_K, query_ref: str = "query") -> NeighborSet:
    """Exact k smallest Euclidean distances, ties broken by beat id ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(index) == 0:
        raise ValueError("cannot query an empty index")
    vector = embedding.vector if isinstance(embedding, Embedding) else np.asarray(embedding)
    vector = np.asarray(vector, dtype=np.float64).ravel()
    if vector.size != index.dim:
        raise ValueError(f"query dimension {vector.size} does not match index dim {index.dim}")

    diffs = index.vectors.astype(np.float64) - vector[None, :]
    distances = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    ids_array = np.array(index.ids)
    order = np.lexsort((ids_array, distances))
    take = order[: min(k, len(index))]
    neighbors = tuple(
        Neighbor(
            beat_id=index.ids[i],
            distance=float(distances[i]),
            label=ClassLabel(int(index.labels[i])),
            rank=rank,
        )
        for rank, i in enumerate(take)
    )
    return NeighborSet(query_ref=query_ref, k=k, neighbors=neighbors)


def class_histogram(ns: NeighborSet) -> ClassHistogram:
    if len(ns) == 0:
        raise ValueError("cannot build a histogram for an empty neighbor set")
    counts = Counter(n.label for n in ns.neighbors)
    bins = sorted(counts.items(), key=lambda item: (-item[1], int(item[0])))
    return ClassHistogram(bins=tuple(bins))


def majority_prediction(ns: NeighborSet) -> ClassLabel:
    """Label of the largest bin; count ties go to the class nearer in aggregate."""
    if len(ns) == 0:
        raise ValueError("cannot take a majority over an empty neighbor set")
    counts: Counter[ClassLabel] = Counter(n.label for n in ns.neighbors)
    summed: dict[ClassLabel, float] = {label: 0.0 for label in counts}
    for n in ns.neighbors:
        summed[n.label] += n.distance
    top = max(counts.values())
    tied = [label for label, count in counts.items() if count == top]
    tied.sort(key=lambda label: (summed[label], int(label)))
    return tied[0]


def save_index(index: EmbeddingIndex, path: str | Path) -> None:
    """Versioned container: fingerprint, dim, count, vectors, labels, ids."""
    path = Path(path)
    fingerprint = index.model_fingerprint.encode("utf-8")
    parts = [
        INDEX_MAGIC,
        struct.pack("<I", INDEX_FORMAT_VERSION),
        struct.pack("<H", len(fingerprint)),
        fingerprint,
        struct.pack("<I", index.dim),
        struct.pack("<Q", len(index)),
        np.ascontiguousarray(index.vectors, dtype="<f4").tobytes(),
        np.ascontiguousarray(index.labels, dtype=np.uint8).tobytes(),
    ]
    for beat_id in index.ids:
        encoded = beat_id.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(b"".join(parts))
    tmp.replace(path)


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise IndexFormatError(f"{what}: file truncated")
    return data


def load_index(path: str | Path) -> EmbeddingIndex:
    path = Path(path)
    with path.open("rb") as fh:
        if fh.read(4) != INDEX_MAGIC:
            raise IndexFormatError(f"{path.name}: not an index file (bad magic)")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "header"))
        if version != INDEX_FORMAT_VERSION:
            raise IndexFormatError(
                f"{path.name}: format version {version} unsupported (expected {INDEX_FORMAT_VERSION})"
            )
        (fp_len,) = struct.unpack("<H", _read_exact(fh, 2, "fingerprint"))
        fingerprint = _read_exact(fh, fp_len, "fingerprint").decode("utf-8")
        (dim,) = struct.unpack("<I", _read_exact(fh, 4, "header"))
        (count,) = struct.unpack("<Q", _read_exact(fh, 8, "header"))
        vectors = np.frombuffer(
            _read_exact(fh, count * dim * 4, "embedding block"), dtype="<f4"
        ).reshape(count, dim).copy()
        labels = np.frombuffer(_read_exact(fh, count, "label block"), dtype=np.uint8).copy()
        ids = []
        for i in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, f"id {i}"))
            ids.append(_read_exact(fh, id_len, f"id {i}").decode("utf-8"))
    return EmbeddingIndex(ids=tuple(ids), labels=labels, vectors=vectors, model_fingerprint=fingerprint)
