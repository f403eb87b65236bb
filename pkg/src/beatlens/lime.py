"""Segment-perturbation surrogate importance with salience selection.

The pipeline: partition the signal into equal segments, sample on/off masks,
replace "off" segments with the beat's mean amplitude, regress the model's
target-class probability on the mask bits (weighted ridge), then keep the
samples whose broadcast importance clears a percentile threshold inside a
long-enough contiguous run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .signals import Beat, ClassLabel, Region

DEFAULT_NUM_SEGMENTS = 20
DEFAULT_NUM_SAMPLES = 1000
DEFAULT_RIDGE_LAMBDA = 1.0
DEFAULT_KERNEL_SIGMA = 0.25
DEFAULT_PERCENTILE = 80.0
DEFAULT_MIN_RUN = 3


class ProbabilityModel(Protocol):
    """Anything that maps a (n, L) batch to (n, num_classes) probabilities."""

    def predict_proba(self, x: np.ndarray) -> np.ndarray: ...


class DegenerateDesignError(ValueError):
    """Too few perturbation samples to fit the surrogate."""


@dataclass(frozen=True)
class SegmentationSpec:
    """Equal-length contiguous partition of [0, L); sizes differ by at most one."""

    num_segments: int = DEFAULT_NUM_SEGMENTS

    def __post_init__(self) -> None:
        if self.num_segments < 1:
            raise ValueError("num_segments must be >= 1")

    def bounds(self, length: int) -> tuple[tuple[int, int], ...]:
        if self.num_segments > length:
            raise ValueError(f"num_segments {self.num_segments} exceeds signal length {length}")
        cuts = [(i * length) // self.num_segments for i in range(self.num_segments + 1)]
        return tuple((cuts[i], cuts[i + 1]) for i in range(self.num_segments))


@dataclass(frozen=True)
class ImportanceProfile:
    """Signed per-segment weights and their piecewise-constant broadcast."""

    per_segment: np.ndarray
    per_sample: np.ndarray
    target_class: ClassLabel
    segment_bounds: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for name in ("per_segment", "per_sample"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class SaliencyMask:
    """Disjoint, sorted regions marked salient."""

    regions: tuple[Region, ...]


def sample_perturbations(spec: SegmentationSpec, n: int, seed: int) -> np.ndarray:
    """n binary masks over the segments; the all-ones mask always comes first."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    masks = rng.integers(0, 2, size=(n, spec.num_segments), dtype=np.uint8)
    masks[0, :] = 1
    return masks


def masked_samples(samples: np.ndarray, bounds: Sequence[tuple[int, int]],
                   mask: np.ndarray, baseline: float) -> np.ndarray:
    out = np.array(samples, dtype=np.float64, copy=True)
    for bit, (start, end) in zip(mask, bounds):
        if not bit:
            out[start:end] = baseline
    return out


def apply_mask(beat: Beat, spec: SegmentationSpec, mask: np.ndarray) -> Beat:
    """Keep bit-1 segments, replace bit-0 segments with the beat's mean amplitude."""
    mask = np.asarray(mask)
    if mask.ndim != 1 or mask.size != spec.num_segments:
        raise ValueError(f"mask length {mask.size} does not match num_segments {spec.num_segments}")
    bounds = spec.bounds(len(beat))
    baseline = float(beat.samples.mean())
    out = masked_samples(beat.samples, bounds, mask, baseline)
    return beat.with_samples(out, new_id=f"{beat.id}+masked", label=None)


def kernel_weights(masks: np.ndarray, sigma: float = DEFAULT_KERNEL_SIGMA) -> np.ndarray:
    """exp(-d^2 / sigma^2) with d the fraction of segments turned off."""
    off_fraction = 1.0 - masks.mean(axis=1, dtype=np.float64)
    return np.exp(-(off_fraction**2) / (sigma**2))


def _weighted_ridge(masks: np.ndarray, y: np.ndarray, weights: np.ndarray,
                    ridge_lambda: float) -> np.ndarray:
    """Ridge on the mask bits with an unpenalized intercept; returns coefficients."""
    n, d = masks.shape
    design = np.concatenate([masks.astype(np.float64), np.ones((n, 1))], axis=1)
    weighted = design * weights[:, None]
    gram = design.T @ weighted
    penalty = np.diag([ridge_lambda] * d + [0.0])
    rhs = weighted.T @ y
    coefs = np.linalg.solve(gram + penalty, rhs)
    return coefs[:-1]


def fit_surrogate(model: ProbabilityModel, beat: Beat, spec: SegmentationSpec | None = None,
                  n: int = DEFAULT_NUM_SAMPLES, seed: int = 0,
                  ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
                  kernel_sigma: float = DEFAULT_KERNEL_SIGMA) -> ImportanceProfile:
    """Local surrogate for the model's top class around one beat.

    The target class is the model's argmax on the unperturbed beat; the
    surrogate regresses that class's probability on segment on/off bits.
    """
    spec = spec or SegmentationSpec()
    if n < spec.num_segments + 1:
        raise DegenerateDesignError(
            f"n={n} perturbation samples cannot identify {spec.num_segments} segment weights; "
            f"use n >= {spec.num_segments + 1} (default {DEFAULT_NUM_SAMPLES})"
        )
    bounds = spec.bounds(len(beat))
    baseline = float(beat.samples.mean())
    masks = sample_perturbations(spec, n, seed)

    batch = np.stack([masked_samples(beat.samples, bounds, mask, baseline) for mask in masks])
    probs = np.asarray(model.predict_proba(batch), dtype=np.float64)
    original = np.asarray(model.predict_proba(beat.samples[None, :]), dtype=np.float64)[0]
    target = ClassLabel(int(np.argmax(original)))

    y = probs[:, int(target)]
    weights = kernel_weights(masks, kernel_sigma)
    per_segment = _weighted_ridge(masks, y, weights, ridge_lambda)

    per_sample = np.empty(len(beat), dtype=np.float64)
    for weight, (start, end) in zip(per_segment, bounds):
        per_sample[start:end] = weight
    return ImportanceProfile(per_segment=per_segment, per_sample=per_sample,
                             target_class=target, segment_bounds=bounds)


def nearest_rank_threshold(values: np.ndarray, percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * N)-th smallest value."""
    if not 0.0 <= percentile <= 100.0:
        raise ValueError("percentile must be in [0, 100]")
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    rank = max(1, math.ceil(percentile / 100.0 * ordered.size))
    return float(ordered[rank - 1])


def salient_regions(profile: ImportanceProfile, percentile: float = DEFAULT_PERCENTILE,
                    min_run: int = DEFAULT_MIN_RUN) -> SaliencyMask:
    """Samples at or above the percentile threshold, kept only in runs >= min_run."""
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    per_sample = profile.per_sample
    threshold = nearest_rank_threshold(per_sample, percentile)
    keep = per_sample >= threshold

    regions: list[Region] = []
    start = None
    for i, flag in enumerate(keep):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= min_run:
                regions.append(Region(start, i))
            start = None
    if start is not None and len(keep) - start >= min_run:
        regions.append(Region(start, len(keep)))
    return SaliencyMask(regions=tuple(regions))
