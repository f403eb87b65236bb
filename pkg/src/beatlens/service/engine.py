"""Session engine behind the HTTP API.

Holds the loaded model, the neighbor index, and all live probe sessions.
A session is an append-only chain of rows: row 0 is the untouched input
beat, each later row applies one transformation to the beat of the row
above it.  Rows are immutable once built, so readers never see a row in
a half-computed state; edits to one session serialize on that session's
lock while other sessions proceed independently.

All public methods return plain payload dicts (the wire format), which
keeps the HTTP layer, the snapshot files, and the golden tests looking
at exactly the same bytes.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .. import lime
from ..model.network import ModelBundle, PredictionResult
from ..neighbors import (
    ClassHistogram,
    EmbeddingIndex,
    NeighborSet,
    class_histogram,
    majority_prediction,
    query_neighbors,
    verify_fingerprint,
)
from ..signals import Beat, ClassLabel, Dataset, Region, Transformation, TransformKind, apply_transformation
from . import wire

DEFAULT_OVERLAY_SPAN = 5


class ServiceError(Exception):
    """Error with a wire code; the HTTP layer maps status from the code."""

    STATUS = {
        "not_found": 404,
        "invalid_argument": 400,
        "invalid_transformation": 400,
        "out_of_range": 400,
        "empty_range": 400,
    }

    def __init__(self, code: str, message: str):
        super().__init__(message)
        if code not in self.STATUS:
            raise ValueError(f"unknown error code {code!r}")
        self.code = code
        self.message = message

    @property
    def status(self) -> int:
        return self.STATUS[self.code]


@dataclass(frozen=True)
class EditRow:
    """One fully-evaluated step of a session chain."""

    row_index: int
    transformation: Optional[Transformation]
    beat: Beat
    prediction: PredictionResult
    neighbors: NeighborSet
    histogram: ClassHistogram
    majority: ClassLabel


@dataclass(frozen=True)
class NeighborLink:
    """A training beat present in two consecutive rows' neighbor sets."""

    beat_id: str
    rank_in_upper: int
    rank_in_lower: int


def shared_neighbor_links(upper: NeighborSet, lower: NeighborSet) -> list[NeighborLink]:
    """Neighbors common to both sets, ordered by their rank in the upper row."""
    lower_rank = {n.beat_id: n.rank for n in lower.neighbors}
    links = [
        NeighborLink(beat_id=n.beat_id, rank_in_upper=n.rank, rank_in_lower=lower_rank[n.beat_id])
        for n in upper.neighbors
        if n.beat_id in lower_rank
    ]
    return links


class Session:
    __slots__ = ("session_id", "input_beat_id", "k", "created_at", "updated_at", "rows", "lock")

    def __init__(self, session_id: str, input_beat_id: str, k: int, created_at: float,
                 first_row: EditRow):
        self.session_id = session_id
        self.input_beat_id = input_beat_id
        self.k = k
        self.created_at = created_at
        self.updated_at = created_at
        self.rows: tuple[EditRow, ...] = (first_row,)
        self.lock = threading.Lock()


def _row_payload(row: EditRow) -> dict:
    return {
        "row_index": row.row_index,
        "transformation": wire.transformation_payload(row.transformation),
        "beat": wire.beat_payload(row.beat),
        "prediction": wire.prediction_payload(row.prediction),
        "majority": wire.label_payload(row.majority),
        "histogram": wire.histogram_payload(row.histogram),
        "neighbors": wire.neighbor_set_payload(row.neighbors),
    }


def _session_payload(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "input_beat_id": session.input_beat_id,
        "k": session.k,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "rows": [_row_payload(row) for row in session.rows],
    }


class ExplainEngine:
    """All state and behavior the endpoints need, minus HTTP."""

    def __init__(
        self,
        bundle: ModelBundle,
        index: EmbeddingIndex,
        train: Dataset,
        pool: Sequence[Beat],
        k: int = 50,
        lime_samples: int = lime.DEFAULT_NUM_SAMPLES,
        lime_segments: int = lime.DEFAULT_NUM_SEGMENTS,
        lime_seed: int = 0,
        saliency_percentile: float = lime.DEFAULT_PERCENTILE,
        saliency_min_run: int = lime.DEFAULT_MIN_RUN,
        clock: Optional[Callable[[], float]] = None,
        sessions_dir: Optional[str] = None,
    ):
        verify_fingerprint(index, bundle)
        if k < 1:
            raise ValueError("k must be >= 1")
        if not pool:
            raise ValueError("beat pool is empty")
        self.bundle = bundle
        self.index = index
        self.k = k
        self.lime_samples = lime_samples
        self.lime_segments = lime_segments
        self.lime_seed = lime_seed
        self.saliency_percentile = saliency_percentile
        self.saliency_min_run = saliency_min_run
        self._clock = clock if clock is not None else time.time
        self._sessions_dir = sessions_dir

        self._train_by_id = {beat.id: beat for beat in train.beats}
        missing = [bid for bid in index.ids if bid not in self._train_by_id]
        if missing:
            raise ValueError(f"index references beats absent from the training set, e.g. {missing[0]!r}")

        self._pool = list(pool)
        self._pool_by_id = {beat.id: beat for beat in self._pool}
        if len(self._pool_by_id) != len(self._pool):
            raise ValueError("duplicate beat ids in pool")
        self._pool_predictions = self._predict_pool()

        self._sessions: dict[str, Session] = {}
        self._sessions_lock = threading.Lock()
        self._session_counter = 0
        self._baseline_cache: dict[str, dict] = {}
        self._baseline_lock = threading.Lock()

    # -- pool ------------------------------------------------------------

    def _predict_pool(self) -> dict[str, dict]:
        """Precompute model and neighbor verdicts for every pool beat."""
        x = np.stack([beat.samples for beat in self._pool]).astype(np.float32)
        probs, embeddings = self.bundle.forward_and_embed_batch(x)
        out = {}
        for i, beat in enumerate(self._pool):
            ns = query_neighbors(self.index, embeddings[i], k=self.k, query_ref=beat.id)
            majority = majority_prediction(ns)
            argmax = ClassLabel(int(np.argmax(probs[i])))
            out[beat.id] = {
                "argmax": wire.label_payload(argmax),
                "majority": wire.label_payload(majority),
            }
        return out

    def list_beats(self, label: Optional[ClassLabel] = None, page: int = 0,
                   page_size: int = 50) -> dict:
        if page < 0:
            raise ServiceError("invalid_argument", "page must be >= 0")
        if page_size < 1:
            raise ServiceError("invalid_argument", "page_size must be >= 1")
        beats = [b for b in self._pool if label is None or b.label == label]
        start = page * page_size
        rows = [
            {
                "id": beat.id,
                "label": wire.label_payload(beat.label) if beat.label is not None else None,
                "length": len(beat),
                "prediction": self._pool_predictions[beat.id],
            }
            for beat in beats[start:start + page_size]
        ]
        return {"total": len(beats), "page": page, "page_size": page_size, "beats": rows}

    # -- sessions --------------------------------------------------------

    def _build_row(self, row_index: int, transformation: Optional[Transformation],
                   beat: Beat) -> EditRow:
        probs, embeddings = self.bundle.forward_and_embed_batch(beat.samples[None, :])
        probabilities = tuple(float(p) for p in probs[0].astype(np.float64))
        prediction = PredictionResult(
            probabilities=probabilities,
            predicted=ClassLabel(int(np.argmax(probs[0]))),
        )
        neighbors = query_neighbors(self.index, embeddings[0], k=self.k, query_ref=beat.id)
        return EditRow(
            row_index=row_index,
            transformation=transformation,
            beat=beat,
            prediction=prediction,
            neighbors=neighbors,
            histogram=class_histogram(neighbors),
            majority=majority_prediction(neighbors),
        )

    def _get_session(self, session_id: str) -> Session:
        with self._sessions_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError("not_found", f"unknown session {session_id!r}")
        return session

    def create_session(self, beat_id: str) -> dict:
        beat = self._pool_by_id.get(beat_id)
        if beat is None:
            raise ServiceError("not_found", f"unknown beat {beat_id!r}")
        first_row = self._build_row(0, None, beat)
        with self._sessions_lock:
            self._session_counter += 1
            session_id = f"s-{self._session_counter:06d}"
            session = Session(session_id, beat.id, self.k, self._clock(), first_row)
            self._sessions[session_id] = session
        self._snapshot(session)
        return _session_payload(session)

    def get_session(self, session_id: str) -> dict:
        session = self._get_session(session_id)
        with session.lock:
            return _session_payload(session)

    def apply_edit(self, session_id: str, kind: str, magnitude: float,
                   region: Optional[tuple[int, int]] = None) -> dict:
        session = self._get_session(session_id)
        try:
            transformation = Transformation(
                kind=TransformKind(kind),
                magnitude=magnitude,
                region=Region(*region) if region is not None else None,
            )
        except ValueError as exc:
            raise ServiceError("invalid_transformation", str(exc)) from None
        with session.lock:
            parent = session.rows[-1]
            derived_id = f"{session.session_id}:r{len(session.rows)}"
            try:
                beat = apply_transformation(parent.beat, transformation, new_id=derived_id)
            except ValueError as exc:
                raise ServiceError("invalid_transformation", str(exc)) from None
            row = self._build_row(len(session.rows), transformation, beat)
            session.rows = session.rows + (row,)
            session.updated_at = self._clock()
            payload = _session_payload(session)
        self._snapshot(session)
        return payload

    # -- derived views ---------------------------------------------------

    def links(self, session_id: str, upper: Optional[int] = None) -> dict:
        session = self._get_session(session_id)
        with session.lock:
            rows = session.rows
        if len(rows) < 2:
            raise ServiceError("invalid_argument", "session has a single row; apply an edit first")
        if upper is None:
            upper = len(rows) - 2
        if not 0 <= upper <= len(rows) - 2:
            raise ServiceError(
                "out_of_range",
                f"upper must be in [0, {len(rows) - 2}], got {upper}",
            )
        links = shared_neighbor_links(rows[upper].neighbors, rows[upper + 1].neighbors)
        return {
            "upper": upper,
            "lower": upper + 1,
            "links": [
                {
                    "beat_id": link.beat_id,
                    "rank_in_upper": link.rank_in_upper,
                    "rank_in_lower": link.rank_in_lower,
                }
                for link in links
            ],
        }

    def overlay(self, session_id: str, row: Optional[int] = None,
                start: Optional[int] = None, end: Optional[int] = None) -> dict:
        session = self._get_session(session_id)
        with session.lock:
            rows = session.rows
        if row is None:
            row = len(rows) - 1
        if not 0 <= row < len(rows):
            raise ServiceError("out_of_range", f"row must be in [0, {len(rows) - 1}], got {row}")
        target = rows[row]
        count = len(target.neighbors.neighbors)
        if start is None:
            start = 0
        if end is None:
            end = min(DEFAULT_OVERLAY_SPAN, count)
        if start < 0 or end > count:
            raise ServiceError(
                "out_of_range",
                f"rank range [{start}, {end}) outside available ranks [0, {count})",
            )
        if start >= end:
            raise ServiceError("empty_range", f"rank range [{start}, {end}) selects no neighbors")
        signals = []
        for neighbor in target.neighbors.neighbors[start:end]:
            beat = self._train_by_id[neighbor.beat_id]
            signals.append(
                {
                    "beat_id": neighbor.beat_id,
                    "rank": neighbor.rank,
                    "distance": neighbor.distance,
                    "label": wire.label_payload(neighbor.label),
                    "samples": [float(v) for v in beat.samples],
                }
            )
        return {
            "row": row,
            "from": start,
            "to": end,
            "query": {"beat_id": target.beat.id, "samples": [float(v) for v in target.beat.samples]},
            "signals": signals,
        }

    # -- saliency baseline ----------------------------------------------

    def baseline(self, beat_id: str) -> dict:
        with self._baseline_lock:
            cached = self._baseline_cache.get(beat_id)
        if cached is not None:
            return cached
        beat = self._pool_by_id.get(beat_id)
        if beat is None:
            raise ServiceError("not_found", f"unknown beat {beat_id!r}")
        profile = lime.fit_surrogate(
            self.bundle,
            beat,
            spec=lime.SegmentationSpec(num_segments=self.lime_segments),
            n=self.lime_samples,
            seed=self.lime_seed,
        )
        saliency = lime.salient_regions(
            profile,
            percentile=self.saliency_percentile,
            min_run=self.saliency_min_run,
        )
        prediction = self.bundle.forward(beat)
        payload = wire.baseline_payload(beat, prediction, profile, saliency)
        with self._baseline_lock:
            self._baseline_cache[beat_id] = payload
        return payload

    # -- persistence -----------------------------------------------------

    def _snapshot(self, session: Session) -> None:
        if self._sessions_dir is None:
            return
        os.makedirs(self._sessions_dir, exist_ok=True)
        with session.lock:
            body = wire.canonical_json(_session_payload(session))
        path = os.path.join(self._sessions_dir, f"{session.session_id}.json")
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(body)
        os.replace(tmp, path)
