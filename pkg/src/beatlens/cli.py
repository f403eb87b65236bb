"""Operator command line: data prep, training, indexing, curation, serving.

Every subcommand is seeded and bit-reproducible, writes output files
atomically, and fails with a one-line diagnostic on stderr and a nonzero
exit status.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from typing import Optional

import numpy as np

from . import synth
from .curate import curate_pool
from .lime import (
    DEFAULT_NUM_SAMPLES,
    DEFAULT_NUM_SEGMENTS,
    SegmentationSpec,
    fit_surrogate,
    salient_regions,
)
from .model import (
    ModelConfig,
    TrainParams,
    evaluate,
    load_weights,
    save_weights,
    train,
)
from .model.network import PredictionResult
from .neighbors import (
    DEFAULT_K,
    build_index,
    class_histogram,
    load_index,
    majority_prediction,
    query_neighbors,
    save_index,
)
from .service import build_engine, load_config
from .service.wire import (
    baseline_payload,
    canonical_json,
    histogram_payload,
    label_payload,
    neighbor_payload,
    prediction_payload,
)
from .signals import DEFAULT_SIGNAL_LENGTH, Beat, ClassLabel, Dataset, load_dataset, save_dataset


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _write_json_atomic(path: str, payload, pretty: bool = False) -> None:
    if pretty:
        body = json.dumps(payload, indent=2, sort_keys=True).encode("utf-8") + b"\n"
    else:
        body = canonical_json(payload) + b"\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_beat(dataset: Dataset, token: str) -> Beat:
    """`--beat` takes an exact beat id, or a 0-based position in the file."""
    for beat in dataset.beats:
        if beat.id == token:
            return beat
    try:
        position = int(token)
    except ValueError:
        raise ValueError(f"no beat with id {token!r} and not a position") from None
    if not 0 <= position < len(dataset.beats):
        raise ValueError(f"beat position {position} outside [0, {len(dataset.beats)})")
    return dataset.beats[position]


# -- subcommands ---------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    spec = synth.SynthSpec(length=args.length)
    corpus_train = synth.generate_split(args.n_train, "train", args.seed, spec)
    corpus_test = synth.generate_split(args.n_test, "test", args.seed + 1, spec)
    save_dataset(corpus_train, args.train_out)
    save_dataset(corpus_test, args.test_out)
    summary = {
        "train": {"path": args.train_out, "rows": args.n_train, "sha256": _file_sha256(args.train_out)},
        "test": {"path": args.test_out, "rows": args.n_test, "sha256": _file_sha256(args.test_out)},
        "seed": args.seed,
        "length": args.length,
    }
    if args.check:
        for split, path in (("train", args.train_out), ("test", args.test_out)):
            reloaded = load_dataset(path, expected_length=args.length, split=split)
            with tempfile.TemporaryDirectory() as tmpdir:
                round_trip = os.path.join(tmpdir, "round_trip.csv")
                save_dataset(reloaded, round_trip)
                if _file_sha256(round_trip) != summary[split]["sha256"]:
                    raise ValueError(f"round-trip checksum mismatch for {path}")
        summary["check"] = "ok"
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset, expected_length=args.length, split=args.split)
    counts = dataset.class_counts
    print(
        json.dumps(
            {
                "path": args.dataset,
                "rows": len(dataset.beats),
                "length": args.length,
                "class_counts": {str(int(label)): count for label, count in counts.items()},
                "sha256": _file_sha256(args.dataset),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset, expected_length=args.length, split="train")
    config = ModelConfig(
        input_length=args.length,
        conv_blocks=args.conv_blocks,
        filters=args.filters,
        dense_units=args.dense_units,
        seed=args.seed,
    )
    bundle = train(dataset, config, epochs=args.epochs, hyper=TrainParams(learning_rate=args.lr))
    save_weights(bundle, args.weights)
    meta = dict(bundle.training_meta)
    meta.pop("epoch_losses", None)
    print(json.dumps({"weights": args.weights, "fingerprint": bundle.fingerprint, **meta},
                     sort_keys=True))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    bundle = load_weights(args.weights)
    dataset = load_dataset(args.dataset, expected_length=bundle.config.input_length, split="test")
    report = evaluate(bundle, dataset)
    print(report.format_table())
    if args.json_out:
        _write_json_atomic(args.json_out, report.to_payload(), pretty=True)
        print(f"wrote {args.json_out}")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    bundle = load_weights(args.weights)
    dataset = load_dataset(args.dataset, expected_length=bundle.config.input_length, split="train")
    index = build_index(bundle, dataset)
    save_index(index, args.index)
    print(
        json.dumps(
            {
                "index": args.index,
                "entries": len(index.ids),
                "dim": index.dim,
                "fingerprint": index.model_fingerprint,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_curate(args: argparse.Namespace) -> int:
    bundle = load_weights(args.weights)
    index = load_index(args.index)
    dataset = load_dataset(args.dataset, expected_length=bundle.config.input_length, split="test")
    manifest, warning = curate_pool(
        bundle,
        index,
        dataset,
        k=args.k,
        per_class=args.per_class,
        incorrect_fraction=args.incorrect_fraction,
        seed=args.seed,
    )
    _write_json_atomic(args.out, manifest, pretty=True)
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        json.dumps(
            {
                "pool": args.out,
                "beats": len(manifest["beats"]),
                "achieved_incorrect_fraction": manifest["achieved_incorrect_fraction"],
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    bundle = load_weights(args.weights)
    index = load_index(args.index)
    dataset = load_dataset(args.dataset, expected_length=bundle.config.input_length,
                           split=args.split)
    beat = _resolve_beat(dataset, args.beat)

    probs, embeddings = bundle.forward_and_embed_batch(beat.samples[None, :])
    prediction = PredictionResult(
        probabilities=tuple(float(p) for p in probs[0].astype(np.float64)),
        predicted=ClassLabel(int(np.argmax(probs[0]))),
    )
    neighbors = query_neighbors(index, embeddings[0], k=args.k, query_ref=beat.id)
    profile = fit_surrogate(bundle, beat, spec=SegmentationSpec(num_segments=args.segments),
                            n=args.samples, seed=args.seed)
    saliency = salient_regions(profile)
    payload = {
        "beat_id": beat.id,
        "label": label_payload(beat.label) if beat.label is not None else None,
        "prediction": prediction_payload(prediction),
        "majority": label_payload(majority_prediction(neighbors)),
        "histogram": histogram_payload(class_histogram(neighbors)),
        "neighbors": [neighbor_payload(n) for n in neighbors.neighbors],
        "baseline": baseline_payload(beat, prediction, profile, saliency),
    }
    print(canonical_json(payload).decode("utf-8"))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    config = load_config(args.config)
    if args.port is not None:
        config = config.replaced({"port": str(args.port)}, source="command line")
    if args.host is not None:
        config = config.replaced({"host": args.host}, source="command line")
    engine = build_engine(config)
    app = create_app(engine)
    print(f"serving on http://{config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


# -- argument wiring -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beatlens",
                                     description="model reliability workbench for beat classifiers")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate the synthetic training and test corpus")
    p.add_argument("--train-out", default="train.csv")
    p.add_argument("--test-out", default="test.csv")
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=400)
    p.add_argument("--length", type=int, default=DEFAULT_SIGNAL_LENGTH)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--check", action="store_true",
                   help="reload the written files and verify a byte-identical round trip")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a dataset file and print a summary")
    p.add_argument("--dataset", required=True)
    p.add_argument("--length", type=int, default=DEFAULT_SIGNAL_LENGTH)
    p.add_argument("--split", default="train")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a classifier and write its weights")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--length", type=int, default=DEFAULT_SIGNAL_LENGTH)
    p.add_argument("--conv-blocks", type=int, default=5)
    p.add_argument("--filters", type=int, default=32)
    p.add_argument("--dense-units", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate weights on a labeled dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("index", help="embed a training set and write the neighbor index")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("curate", help="pick the demonstration pool from a test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--per-class", type=int, default=3)
    p.add_argument("--incorrect-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("explain", help="print one beat's neighbor and saliency explanations")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--beat", required=True, help="beat id, or 0-based position in the file")
    p.add_argument("--split", default="test")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--segments", type=int, default=DEFAULT_NUM_SEGMENTS)
    p.add_argument("--samples", type=int, default=DEFAULT_NUM_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None, help="key=value config file (or set EXPLAIN_CONFIG)")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
