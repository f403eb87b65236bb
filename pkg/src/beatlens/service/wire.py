"""Canonical JSON payload builders for the HTTP API.

Every field name on the wire is fixed here (and documented in
docs/api_schema.md); payloads are serialized with sorted keys and no
whitespace so that identical inputs always produce byte-identical bodies.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from ..lime import ImportanceProfile, SaliencyMask
from ..model.network import PredictionResult
from ..neighbors import ClassHistogram, Neighbor, NeighborSet
from ..signals import Beat, ClassLabel, Region, Transformation


def canonical_json(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def label_payload(label: ClassLabel) -> dict:
    return {"code": int(label), "name": label.display_name, "color": label.color_key}


def region_payload(region: Optional[Region]) -> Optional[dict]:
    if region is None:
        return None
    return {"start": region.start, "end": region.end}


def transformation_payload(t: Optional[Transformation]) -> Optional[dict]:
    if t is None:
        return None
    return {"kind": t.kind.value, "magnitude": t.magnitude, "region": region_payload(t.region)}


def beat_payload(beat: Beat) -> dict:
    return {
        "id": beat.id,
        "samples": [float(v) for v in beat.samples],
        "length": len(beat),
        "sample_rate_hz": beat.sample_rate_hz,
        "label": label_payload(beat.label) if beat.label is not None else None,
    }


def prediction_payload(prediction: PredictionResult) -> dict:
    return {
        "probabilities": [float(p) for p in prediction.probabilities],
        "predicted": label_payload(prediction.predicted),
    }


def neighbor_payload(neighbor: Neighbor) -> dict:
    return {
        "beat_id": neighbor.beat_id,
        "rank": neighbor.rank,
        "distance": neighbor.distance,
        "label": label_payload(neighbor.label),
    }


def histogram_payload(histogram: ClassHistogram) -> list[dict]:
    return [{"label": label_payload(label), "count": count} for label, count in histogram.bins]


def neighbor_set_payload(ns: NeighborSet) -> dict:
    return {
        "k": ns.k,
        "count": len(ns),
        "neighbors": [neighbor_payload(n) for n in ns.neighbors],
    }


def baseline_payload(beat: Beat, prediction: PredictionResult, profile: ImportanceProfile,
                     saliency: SaliencyMask) -> dict:
    probability = prediction.probabilities[int(prediction.predicted)]
    return {
        "beat_id": beat.id,
        "samples": [float(v) for v in beat.samples],
        "predicted": label_payload(prediction.predicted),
        "probability": float(probability),
        "num_segments": len(profile.per_segment),
        "segment_bounds": [[start, end] for start, end in profile.segment_bounds],
        "per_segment_weights": [float(w) for w in profile.per_segment],
        "salient_regions": [region_payload(r) for r in saliency.regions],
    }


def error_payload(code: str, message: str) -> dict:
    return {"code": code, "message": message}
