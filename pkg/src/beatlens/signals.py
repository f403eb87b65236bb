"""Beats, class labels, regions, and the four region-aware signal edits.

Everything here is an immutable value: transformations return new beats and
never touch their inputs, so concurrent readers need no locking.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "ClassLabel",
    "Region",
    "TransformKind",
    "Transformation",
    "Beat",
    "Dataset",
    "DatasetFormatError",
    "resample_region",
    "transform_samples",
    "apply_transformation",
    "load_dataset",
    "save_dataset",
]

# 125 Hz x 1.5 s, floored; confirmed against the ingested file at load time.
DEFAULT_SAMPLE_RATE_HZ = 125.0
DEFAULT_SIGNAL_LENGTH = 187
PAD_VALUE = 0.0


class ClassLabel(enum.IntEnum):
    """The four beat categories, with stable integer codes 0-3."""

    NORMAL = 0
    SUPRAVENTRICULAR_ECTOPIC = 1
    VENTRICULAR_ECTOPIC = 2
    FUSION = 3

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def color_key(self) -> str:
        return _COLOR_KEYS[self]

    @classmethod
    def from_code(cls, code: int) -> "ClassLabel":
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"class code must be in 0..3, got {code!r}") from None

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        key = name.strip().lower().replace(" ", "_").replace("-", "_")
        for label in cls:
            if label.name.lower() == key or label.display_name.lower().replace(" ", "_") == key:
                return label
        raise ValueError(f"unknown class label {name!r}")


_DISPLAY_NAMES = {
    ClassLabel.NORMAL: "Normal",
    ClassLabel.SUPRAVENTRICULAR_ECTOPIC: "Supraventricular Ectopic",
    ClassLabel.VENTRICULAR_ECTOPIC: "Ventricular Ectopic",
    ClassLabel.FUSION: "Fusion",
}

_COLOR_KEYS = {
    ClassLabel.NORMAL: "#4c78a8",
    ClassLabel.SUPRAVENTRICULAR_ECTOPIC: "#e377c2",
    ClassLabel.VENTRICULAR_ECTOPIC: "#ff7f0e",
    ClassLabel.FUSION: "#2ca02c",
}


@dataclass(frozen=True)
class Region:
    """Half-open sample range [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"region must satisfy 0 <= start < end, got [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def validate_for(self, length: int) -> None:
        if self.end > length:
            raise ValueError(f"region [{self.start}, {self.end}) exceeds signal length {length}")


class TransformKind(enum.Enum):
    AMPLIFY = "amplify"
    DAMPEN = "dampen"
    STRETCH = "stretch"
    COMPRESS = "compress"


@dataclass(frozen=True)
class Transformation:
    """A region-aware edit: scale amplitude or resample duration.

    Magnitude constraints: amplify and stretch need magnitude > 1, dampen and
    compress need 0 < magnitude < 1.  ``region=None`` means the whole signal.
    """

    kind: TransformKind
    magnitude: float
    region: Optional[Region] = None

    def __post_init__(self) -> None:
        m = self.magnitude
        if not np.isfinite(m):
            raise ValueError(f"magnitude must be finite, got {m!r}")
        if self.kind in (TransformKind.AMPLIFY, TransformKind.STRETCH):
            if not m > 1.0:
                raise ValueError(f"{self.kind.value} requires magnitude > 1, got {m}")
        else:
            if not 0.0 < m < 1.0:
                raise ValueError(f"{self.kind.value} requires magnitude in (0, 1), got {m}")


@dataclass(frozen=True)
class Beat:
    """A fixed-length amplitude sequence, normalized to [0, 1]."""

    id: str
    samples: np.ndarray
    label: Optional[ClassLabel] = None
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"beat {self.id!r}: samples contain non-finite values")
        if samples.min() < 0.0 or samples.max() > 1.0:
            raise ValueError(f"beat {self.id!r}: samples outside [0, 1]")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    def with_samples(self, samples: np.ndarray, new_id: str, label: Optional[ClassLabel] = None) -> "Beat":
        return Beat(id=new_id, samples=samples, label=label, sample_rate_hz=self.sample_rate_hz)


class DatasetFormatError(ValueError):
    """Raised when a dataset file does not match the expected row format."""


@dataclass(frozen=True)
class Dataset:
    """A split of labeled beats sharing one signal length."""

    beats: tuple[Beat, ...]
    split: str
    length: int
    class_counts: Mapping[ClassLabel, int] = field(default_factory=dict)

    @classmethod
    def from_beats(cls, beats: Iterable[Beat], split: str) -> "Dataset":
        beats = tuple(beats)
        if not beats:
            raise ValueError("dataset must contain at least one beat")
        if split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {split!r}")
        length = len(beats[0])
        counts = {label: 0 for label in ClassLabel}
        for beat in beats:
            if len(beat) != length:
                raise ValueError(f"beat {beat.id!r} has length {len(beat)}, expected {length}")
            if beat.label is None:
                raise ValueError(f"beat {beat.id!r} is unlabeled")
            counts[beat.label] += 1
        return cls(beats=beats, split=split, length=length, class_counts=counts)

    def __len__(self) -> int:
        return len(self.beats)

    def class_shares(self) -> dict[ClassLabel, float]:
        n = len(self.beats)
        return {label: count / n for label, count in self.class_counts.items()}


def resample_region(values: Sequence[float] | np.ndarray, new_length: int) -> np.ndarray:
    """Linearly resample a 1-D sequence onto ``new_length`` evenly spaced points.

    Both endpoints are preserved whenever the input and output have at least
    two points; a single input value extends as a constant.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a non-empty 1-D sequence")
    if new_length < 1:
        raise ValueError(f"new_length must be >= 1, got {new_length}")
    if values.size == 1:
        return np.full(new_length, float(values[0]))
    if new_length == 1:
        return values[:1].copy()
    positions = np.linspace(0.0, float(values.size - 1), new_length)
    return np.interp(positions, np.arange(values.size, dtype=np.float64), values)


def _resolve_region(t: Transformation, length: int) -> Region:
    region = t.region if t.region is not None else Region(0, length)
    region.validate_for(length)
    return region


def transform_samples(samples: np.ndarray, t: Transformation) -> np.ndarray:
    """Apply a transformation to a raw sample array (no [0, 1] requirement).

    Amplify/dampen scale the region multiplicatively and clamp to [0, 1].
    Stretch/compress resample the region to round(magnitude * region_length)
    points, shift everything after the region, then truncate (stretch) or
    zero-pad (compress) back to the original length.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("samples must be a non-empty 1-D sequence")
    n = samples.size
    region = _resolve_region(t, n)

    if t.kind in (TransformKind.AMPLIFY, TransformKind.DAMPEN):
        out = samples.copy()
        out[region.start : region.end] = np.clip(out[region.start : region.end] * t.magnitude, 0.0, 1.0)
        return out

    old_length = len(region)
    # round() is half-to-even at exact .5 boundaries; a degenerate region never
    # shrinks below one sample.
    new_length = max(1, int(round(t.magnitude * old_length)))
    resampled = resample_region(samples[region.start : region.end], new_length)
    out = np.concatenate([samples[: region.start], resampled, samples[region.end :]])
    if out.size >= n:
        return out[:n]
    return np.pad(out, (0, n - out.size), constant_values=PAD_VALUE)


def apply_transformation(beat: Beat, t: Transformation, new_id: Optional[str] = None) -> Beat:
    """Return a new beat with ``t`` applied; length and [0, 1] range preserved."""
    out = transform_samples(beat.samples, t)
    # Interpolation of in-range values cannot leave [0, 1] except by an ulp.
    out = np.clip(out, 0.0, 1.0)
    derived_id = new_id if new_id is not None else f"{beat.id}+{t.kind.value}"
    return beat.with_samples(out, new_id=derived_id, label=None)


def load_dataset(path: str | Path, expected_length: int, split: str = "train") -> Dataset:
    """Parse a headerless CSV of ``expected_length`` floats plus one label per row.

    Rejects empty files, rows of the wrong arity, unparsable fields, labels
    outside 0-3, and samples outside [0, 1]; errors name the offending
    1-based row.
    """
    path = Path(path)
    if expected_length < 1:
        raise ValueError("expected_length must be >= 1")
    beats: list[Beat] = []
    prefix = f"{split}-"
    with path.open("r", encoding="utf-8") as fh:
        for row_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != expected_length + 1:
                raise DatasetFormatError(
                    f"{path.name} row {row_number}: expected {expected_length + 1} fields "
                    f"({expected_length} samples + label), got {len(fields)}"
                )
            try:
                samples = np.array([float(v) for v in fields[:-1]], dtype=np.float64)
            except ValueError:
                raise DatasetFormatError(f"{path.name} row {row_number}: unparsable sample value") from None
            label_text = fields[-1].strip()
            try:
                label_value = float(label_text)
            except ValueError:
                raise DatasetFormatError(f"{path.name} row {row_number}: unparsable label {label_text!r}") from None
            code = int(label_value)
            if code != label_value:
                raise DatasetFormatError(f"{path.name} row {row_number}: non-integer label {label_text!r}")
            if code not in (0, 1, 2, 3):
                raise DatasetFormatError(f"{path.name} row {row_number}: label {code} outside 0-3")
            if samples.min() < 0.0 or samples.max() > 1.0:
                raise DatasetFormatError(f"{path.name} row {row_number}: sample outside [0, 1]")
            beats.append(
                Beat(id=f"{prefix}{row_number - 1:05d}", samples=samples, label=ClassLabel(code))
            )
    if not beats:
        raise DatasetFormatError(f"{path.name}: empty dataset file")
    return Dataset.from_beats(beats, split=split)


def format_dataset_rows(dataset: Dataset) -> Iterable[str]:
    for beat in dataset.beats:
        yield ",".join(repr(float(v)) for v in beat.samples) + f",{int(beat.label)}"


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Serialize with shortest-round-trip floats so load(save(d)) is a fixed point."""
    path = Path(path)
    body = "\n".join(format_dataset_rows(dataset)) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(body, encoding="utf-8")
    tmp.replace(path)
