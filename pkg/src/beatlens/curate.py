"""Build the demonstration pool: a small class-balanced beat set where a
target share of the beats carries an incorrect neighbor-majority prediction,
allocated toward the classes the model actually gets wrong."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .model.network import ModelBundle
from .neighbors import EmbeddingIndex, majority_prediction, query_neighbors, verify_fingerprint
from .signals import ClassLabel, Dataset

MANIFEST_VERSION = 1


def _label_payload(label: ClassLabel) -> dict:
    return {"code": int(label), "name": label.display_name}


def curate_pool(bundle: ModelBundle, index: EmbeddingIndex, test: Dataset, k: int,
                per_class: int = 3, incorrect_fraction: float = 0.3,
                seed: int = 0) -> tuple[dict, Optional[str]]:
    """Select per_class beats per label from the test split.

    Aims for at least ``incorrect_fraction`` of the pool having an incorrect
    majority prediction; incorrect picks are drawn from the classes with the
    most mispredictions available.  Returns (manifest, warning) where the
    warning is set when the model predicts too well to reach the target.
    """
    verify_fingerprint(index, bundle)
    if test.split != "test":
        raise ValueError(f"the pool is curated from the test split, got {test.split!r}")
    pool_size = per_class * len(ClassLabel)
    needed_incorrect = math.ceil(incorrect_fraction * pool_size)

    x = np.stack([beat.samples for beat in test.beats])
    embeddings = []
    for start in range(0, x.shape[0], 512):
        embeddings.append(np.asarray(bundle.embed_batch(x[start : start + 512])))
    embeddings = np.concatenate(embeddings, axis=0)
    probs = []
    for start in range(0, x.shape[0], 512):
        probs.append(bundle.predict_proba(x[start : start + 512]))
    argmax = np.concatenate(probs, axis=0).argmax(axis=1)

    records = []
    for i, beat in enumerate(test.beats):
        ns = query_neighbors(index, embeddings[i], k=k, query_ref=beat.id)
        majority = majority_prediction(ns)
        records.append(
            {
                "beat": beat,
                "majority": majority,
                "argmax": ClassLabel(int(argmax[i])),
                "majority_correct": majority == beat.label,
            }
        )

    by_class: dict[ClassLabel, dict[str, list]] = {}
    for label in ClassLabel:
        members = [r for r in records if r["beat"].label == label]
        if len(members) < per_class:
            raise ValueError(
                f"test split has only {len(members)} beats of class {label.display_name}, "
                f"need {per_class}"
            )
        by_class[label] = {
            "incorrect": [r for r in members if not r["majority_correct"]],
            "correct": [r for r in members if r["majority_correct"]],
        }

    # Allocate incorrect picks greedily toward the classes with the most
    # mispredictions, mirroring where the model actually fails.
    quota = {label: 0 for label in ClassLabel}
    while sum(quota.values()) < needed_incorrect:
        candidates = [
            label for label in ClassLabel
            if quota[label] < per_class and quota[label] < len(by_class[label]["incorrect"])
        ]
        if not candidates:
            break
        candidates.sort(key=lambda l: (-(len(by_class[l]["incorrect"]) - quota[l]), int(l)))
        quota[candidates[0]] += 1

    rng = np.random.default_rng(seed)
    chosen = []
    for label in ClassLabel:
        incorrect = by_class[label]["incorrect"]
        correct = by_class[label]["correct"]
        take_incorrect = quota[label]
        picks = list(rng.choice(len(incorrect), size=take_incorrect, replace=False)) if take_incorrect else []
        selected = [incorrect[i] for i in sorted(int(p) for p in picks)]
        remaining = per_class - len(selected)
        if len(correct) >= remaining:
            picks = list(rng.choice(len(correct), size=remaining, replace=False)) if remaining else []
            selected += [correct[i] for i in sorted(int(p) for p in picks)]
        else:
            # Not enough correctly-predicted beats; backfill with more incorrect.
            selected += correct
            leftovers = [r for r in incorrect if r not in selected]
            selected += leftovers[: per_class - len(selected)]
        chosen.extend(selected)

    achieved = sum(1 for r in chosen if not r["majority_correct"])
    warning = None
    if achieved < needed_incorrect:
        warning = (
            f"only {achieved} of {pool_size} pool beats have incorrect majority "
            f"predictions (target {needed_incorrect}); the test split does not "
            f"hold enough mispredicted beats in the right classes"
        )

    manifest = {
        "version": MANIFEST_VERSION,
        "model_fingerprint": bundle.fingerprint,
        "k": k,
        "per_class": per_class,
        "requested_incorrect_fraction": incorrect_fraction,
        "achieved_incorrect_fraction": achieved / pool_size,
        "warning": warning,
        "beats": [
            {
                "id": r["beat"].id,
                "label": _label_payload(r["beat"].label),
                "majority_prediction": _label_payload(r["majority"]),
                "argmax_prediction": _label_payload(r["argmax"]),
                "majority_correct": r["majority_correct"],
                "argmax_correct": r["argmax"] == r["beat"].label,
            }
            for r in chosen
        ],
    }
    return manifest, warning
