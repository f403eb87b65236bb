"""Desk-scale synthetic beat corpus with four separable morphologies.

Each class is a parameterized sum of Gaussian deflections on a 125 Hz grid,
jittered per beat and zero-padded like the real preprocessed recordings:

    Normal                  -- P wave, narrow-ish R spike, modest T wave
    Supraventricular ectopic -- very narrow R spike, no P wave
    Ventricular ectopic      -- wide R complex, no P, prominent T
    Fusion                   -- blend of the normal and wide morphologies

Widths, P-wave presence, and T-wave size carry the class signal, which is
what makes stretch/compress and amplify/dampen probes interesting on this
corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import Beat, ClassLabel, Dataset, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_SIGNAL_LENGTH


@dataclass(frozen=True)
class SynthSpec:
    length: int = DEFAULT_SIGNAL_LENGTH
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    noise_sigma: float = 0.015


def _bump(t: np.ndarray, center: float, width: float, amp: float) -> np.ndarray:
    return amp * np.exp(-0.5 * ((t - center) / width) ** 2)


def _morphology(label: ClassLabel, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
    jitter = rng.normal
    if label is ClassLabel.NORMAL:
        signal = (
            _bump(t, jitter(0.13, 0.015), max(0.012, jitter(0.026, 0.003)), jitter(0.20, 0.03))
            + _bump(t, jitter(0.32, 0.015), max(0.010, jitter(0.018, 0.002)), 1.0)
            + _bump(t, jitter(0.53, 0.02), max(0.03, jitter(0.055, 0.006)), jitter(0.30, 0.05))
        )
    elif label is ClassLabel.SUPRAVENTRICULAR_ECTOPIC:
        signal = (
            _bump(t, jitter(0.28, 0.015), max(0.006, jitter(0.009, 0.001)), 1.0)
            + _bump(t, jitter(0.46, 0.02), max(0.025, jitter(0.042, 0.005)), jitter(0.20, 0.04))
        )
    elif label is ClassLabel.VENTRICULAR_ECTOPIC:
        signal = (
            _bump(t, jitter(0.34, 0.015), max(0.035, jitter(0.058, 0.006)), 1.0)
            + _bump(t, jitter(0.62, 0.02), max(0.045, jitter(0.075, 0.008)), jitter(0.42, 0.06))
        )
    else:  # fusion: blend of the normal and wide-complex shapes
        alpha = rng.uniform(0.4, 0.6)
        normal = (
            _bump(t, jitter(0.13, 0.015), max(0.012, jitter(0.026, 0.003)), jitter(0.20, 0.03))
            + _bump(t, jitter(0.32, 0.012), max(0.010, jitter(0.018, 0.002)), 1.0)
            + _bump(t, jitter(0.53, 0.02), max(0.03, jitter(0.055, 0.006)), jitter(0.30, 0.05))
        )
        wide = (
            _bump(t, jitter(0.34, 0.012), max(0.035, jitter(0.058, 0.006)), 1.0)
            + _bump(t, jitter(0.62, 0.02), max(0.045, jitter(0.075, 0.008)), jitter(0.42, 0.06))
        )
        signal = alpha * normal + (1.0 - alpha) * wide
    return signal


def generate_beat_samples(label: ClassLabel, rng: np.random.Generator,
                          spec: SynthSpec = SynthSpec()) -> np.ndarray:
    t = np.arange(spec.length, dtype=np.float64) / spec.sample_rate_hz
    signal = 0.06 + _morphology(label, rng, t)
    signal += rng.normal(0.0, spec.noise_sigma, size=spec.length)

    # Active window then zero padding, like the source recordings.
    active_seconds = rng.uniform(0.85, 1.15)
    active = min(spec.length, int(round(active_seconds * spec.sample_rate_hz)))
    signal[active:] = 0.0

    window = signal[:active]
    low, high = window.min(), window.max()
    signal[:active] = (window - low) / (high - low)
    return np.clip(signal, 0.0, 1.0)


def generate_split(n: int, split: str, seed: int, spec: SynthSpec = SynthSpec()) -> Dataset:
    """n beats cycling through the four classes, deterministic in seed."""
    rng = np.random.default_rng(seed)
    beats = []
    for i in range(n):
        label = ClassLabel(i % 4)
        samples = generate_beat_samples(label, rng, spec)
        beats.append(Beat(id=f"{split}-{i:05d}", samples=samples, label=label,
                          sample_rate_hz=spec.sample_rate_hz))
    return Dataset.from_beats(beats, split=split)


def generate_corpus(n_train: int = 2000, n_test: int = 400, seed: int = 7,
                    spec: SynthSpec = SynthSpec()) -> tuple[Dataset, Dataset]:
    train = generate_split(n_train, "train", seed, spec)
    test = generate_split(n_test, "test", seed + 1, spec)
    return train, test
