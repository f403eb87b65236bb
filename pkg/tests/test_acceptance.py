"""Release gates: every core guarantee of the workbench, end to end.

Each test prints one ACCEPTANCE PASS line on success so a verbose run
reads as a checklist.  The desk-scale fixture trains the default model
on the bundled synthetic corpus once and is shared by the slower gates.
"""

import json
import math
import time
from types import SimpleNamespace

import numpy as np
import pytest
from fastapi.testclient import TestClient

from beatlens.cli import main as cli_main
from beatlens.lime import ImportanceProfile, SegmentationSpec, fit_surrogate, salient_regions
from beatlens.model import ModelConfig, evaluate, init_params, save_weights, train
from beatlens.model.network import loss_and_grads
from beatlens.neighbors import EmbeddingIndex, build_index, query_neighbors, save_index
from beatlens.service import ExplainEngine, create_app
from beatlens.signals import (
    ClassLabel,
    Dataset,
    Region,
    TransformKind,
    Transformation,
    apply_transformation,
    save_dataset,
    transform_samples,
)
from beatlens.synth import SynthSpec, generate_corpus, generate_split

from test_gradients import TINY, max_relative_error, numeric_grads


@pytest.fixture(scope="session")
def desk(tmp_path_factory):
    """Default-config model trained for 10 epochs on the 2000/400 synthetic corpus."""
    root = tmp_path_factory.mktemp("desk")
    started = time.monotonic()
    train_set, test_set = generate_corpus(n_train=2000, n_test=400, seed=7)
    bundle = train(train_set, ModelConfig(input_length=187), epochs=10)
    train_elapsed = time.monotonic() - started
    index = build_index(bundle, train_set)

    paths = {
        "weights": root / "model.blnw",
        "index": root / "train.blni",
        "train": root / "train.csv",
        "test": root / "test.csv",
    }
    save_weights(bundle, str(paths["weights"]))
    save_index(index, str(paths["index"]))
    save_dataset(train_set, str(paths["train"]))
    save_dataset(test_set, str(paths["test"]))
    return SimpleNamespace(train=train_set, test=test_set, bundle=bundle, index=index,
                           train_elapsed=train_elapsed, paths=paths)


# -- neighbor search ----------------------------------------------------

def test_neighbor_search_matches_brute_force_oracle():
    """100 random quantized indices, every k, bit-exact against a sort oracle.

    Quantized coordinates make distances exact in both float32 storage and
    float64 math, so ordering and tie-breaks must agree to the last bit.
    """
    rng = np.random.default_rng(2024)
    started = time.monotonic()
    for trial in range(100):
        n = int(rng.integers(1, 201))
        dim = int(rng.integers(1, 9))
        step = 1.0 if trial % 2 == 0 else 0.25
        vectors = (rng.integers(0, 8, size=(n, dim)) * step).astype(np.float32)
        perm = rng.permutation(n)
        ids = tuple(f"b{int(p):04d}" for p in perm)
        labels = rng.integers(0, 4, size=n).astype(np.uint8)
        index = EmbeddingIndex(ids=ids, labels=labels, vectors=vectors,
                               model_fingerprint="a" * 64)
        query = (rng.integers(0, 8, size=dim) * step).astype(np.float32)

        dist64 = [
            math.sqrt(float(np.sum((vectors[i].astype(np.float64)
                                    - query.astype(np.float64)) ** 2)))
            for i in range(n)
        ]
        oracle_order = sorted(range(n), key=lambda i: (dist64[i], ids[i]))

        for k in (1, 5, n):
            ns = query_neighbors(index, query, k=k)
            expect = oracle_order[: min(k, n)]
            got = [(p.beat_id, p.rank, p.distance) for p in ns.neighbors]
            want = [(ids[i], rank, dist64[i]) for rank, i in enumerate(expect)]
            assert got == want, f"trial {trial}, k={k}"
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    print(f"ACCEPTANCE PASS: neighbor search equals brute-force oracle ({elapsed:.2f}s)")


# -- gradients ----------------------------------------------------------

def test_analytic_gradients_match_finite_differences():
    started = time.monotonic()
    params = init_params(TINY, dtype=np.float64)
    rng = np.random.default_rng(17)
    x = rng.uniform(0.0, 1.0, size=(4, TINY.input_length))
    y = np.array([0, 1, 2, 3])
    _, _, analytic = loss_and_grads(params, TINY, x, y)
    numeric = numeric_grads(params, TINY, x, y)
    worst = max_relative_error(analytic, numeric)
    elapsed = time.monotonic() - started
    assert worst < 1e-4
    assert elapsed < 60.0
    print(f"ACCEPTANCE PASS: gradient check, max relative error {worst:.2e} ({elapsed:.2f}s)")


# -- probability contract -----------------------------------------------

def test_probabilities_normalize_and_argmax_is_the_prediction(desk):
    beats = generate_split(1000, "test", seed=123).beats
    for beat in beats:
        result = desk.bundle.forward(beat)
        assert abs(sum(result.probabilities) - 1.0) < 1e-6
        assert int(result.predicted) == int(np.argmax(result.probabilities))
    print("ACCEPTANCE PASS: 1000 beats, probabilities sum to 1 and argmax is the prediction")


# -- transformation algebra ---------------------------------------------

def test_transformation_algebra_over_random_pairs():
    length = 187
    rng = np.random.default_rng(99)
    kinds = list(TransformKind)
    for trial in range(1000):
        samples = rng.uniform(0.0, 0.49, size=length)

        # random legal transformation: output stays length L in [0, 1]
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in (TransformKind.AMPLIFY, TransformKind.STRETCH):
            magnitude = float(rng.uniform(1.0, 2.0)) + 1e-6
        else:
            magnitude = float(rng.uniform(0.5, 1.0 - 1e-6))
        region = None
        if rng.integers(2):
            a = int(rng.integers(0, length - 1))
            b = int(rng.integers(a + 1, length + 1))
            region = Region(a, b)
        out = transform_samples(samples, Transformation(kind=kind, magnitude=magnitude,
                                                        region=region))
        assert out.shape == (length,)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)

        # identity: a stretch/compress whose resample rounds back to the
        # region's own length must return the input bit-for-bit
        a = int(rng.integers(0, length - 10))
        r = int(rng.integers(2, 10))
        identity_region = Region(a, a + r)
        for identity in (
            Transformation(kind=TransformKind.STRETCH, magnitude=1.0 + 0.4 / r,
                           region=identity_region),
            Transformation(kind=TransformKind.COMPRESS, magnitude=1.0 - 0.4 / r,
                           region=identity_region),
        ):
            assert np.array_equal(transform_samples(samples, identity), samples)

        # reciprocal: amplify then dampen by 1/m on interior values
        magnitude = float(rng.uniform(1.0 + 1e-9, 2.0))
        region = None
        if rng.integers(2):
            a = int(rng.integers(0, length - 1))
            region = Region(a, int(rng.integers(a + 1, length + 1)))
        up = transform_samples(samples, Transformation(kind=TransformKind.AMPLIFY,
                                                       magnitude=magnitude, region=region))
        down = transform_samples(up, Transformation(kind=TransformKind.DAMPEN,
                                                    magnitude=1.0 / magnitude, region=region))
        assert np.max(np.abs(down - samples)) < 1e-9
    print("ACCEPTANCE PASS: transformation algebra holds over 1000 random pairs")


# -- desk-scale learning ------------------------------------------------

def test_desk_scale_training_reaches_target_accuracy(desk, capsys):
    report = evaluate(desk.bundle, desk.test)
    assert report.overall_accuracy >= 0.95
    assert desk.train_elapsed < 600.0

    # the eval subcommand renders the per-class report: header, one row
    # per class, then the overall row
    assert cli_main(["eval", "--dataset", str(desk.paths["test"]),
                     "--weights", str(desk.paths["weights"])]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].split("|") and [c.strip() for c in lines[0].split("|")] == [
        "Class", "% of Examples", "Test Set Accuracy"]
    body = [l.split("|")[0].strip() for l in lines[2:7]]
    assert body == [label.display_name for label in ClassLabel] + ["Overall"]
    print(f"ACCEPTANCE PASS: desk-scale training, test accuracy "
          f"{100.0 * report.overall_accuracy:.1f}% in {desk.train_elapsed:.1f}s")


# -- surrogate recovery -------------------------------------------------

class SegmentMeanLinearModel:
    """Oracle whose class-1 probability is affine in six segment means.

    The segment means and coefficients are chosen so that replacing any
    segment with the signal's global mean moves the probability in rank
    order of the coefficients; the surrogate must recover that ranking.
    """

    coefficients = np.array([6.0, 5.0, 4.0, 3.0, 2.0, 1.0])

    def __init__(self, length=60):
        self.length = length
        self.bounds = SegmentationSpec(num_segments=6).bounds(length)

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        means = np.stack([x[:, s:e].mean(axis=1) for s, e in self.bounds], axis=1)
        p = means @ self.coefficients / 20.0
        out = np.empty((x.shape[0], 4))
        out[:, 1] = p
        out[:, 0] = out[:, 2] = out[:, 3] = (1.0 - p) / 3.0
        return out


def test_surrogate_recovers_linear_oracle_ranking():
    # segment means 0.5 + d with d = [.2, .12, .04, -.04, -.08, -.24]:
    # the coefficient-weighted deltas are strictly descending, so the
    # oracle's ranking in mask space equals its raw coefficient ranking
    oracle = SegmentMeanLinearModel()
    deltas = np.array([0.2, 0.12, 0.04, -0.04, -0.08, -0.24])
    samples = np.repeat(0.5 + deltas, 10)
    beat = generate_split(1, "test", seed=0, spec=SynthSpec(length=60)).beats[0]
    beat = beat.with_samples(samples, new_id="oracle-beat")

    profile = fit_surrogate(oracle, beat, spec=SegmentationSpec(num_segments=6),
                            n=1000, seed=0)
    assert profile.target_class == ClassLabel(1)

    surrogate_rank = np.argsort(np.argsort(-profile.per_segment))
    oracle_rank = np.argsort(np.argsort(-oracle.coefficients))
    assert np.array_equal(surrogate_rank, oracle_rank)
    correlation = float(np.corrcoef(surrogate_rank, oracle_rank)[0, 1])
    assert correlation == 1.0

    hand = np.array([0.1, 0.2, 0.9, 0.95, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1])
    profile = ImportanceProfile(
        per_segment=hand.copy(),
        per_sample=hand.copy(),
        target_class=ClassLabel(0),
        segment_bounds=tuple((i, i + 1) for i in range(10)),
    )
    mask = salient_regions(profile, percentile=80.0, min_run=3)
    assert [(r.start, r.end) for r in mask.regions] == [(2, 5)]
    print("ACCEPTANCE PASS: surrogate rank correlation 1.0; hand profile yields [2, 5)")


# -- session chains -----------------------------------------------------

def desk_engine(desk, **kwargs):
    clock = iter(float(i) for i in range(1, 10_000))
    kwargs.setdefault("clock", lambda: next(clock))
    return ExplainEngine(desk.bundle, desk.index, desk.train, list(desk.test.beats),
                         **kwargs)


def random_edit(rng, length=187):
    kind = list(TransformKind)[int(rng.integers(4))]
    if kind in (TransformKind.AMPLIFY, TransformKind.STRETCH):
        magnitude = float(rng.uniform(1.0, 2.0)) + 1e-6
    else:
        magnitude = float(rng.uniform(0.5, 1.0 - 1e-6))
    region = None
    if rng.integers(2):
        a = int(rng.integers(0, length - 1))
        region = (a, int(rng.integers(a + 1, length + 1)))
    return kind.value, magnitude, region


def test_session_chains_recompute_bit_exactly_and_links_match(desk):
    engine = desk_engine(desk)
    rng = np.random.default_rng(7)
    for beat in list(desk.test.beats)[:3]:
        sid = engine.create_session(beat.id)["session_id"]
        edits = [random_edit(rng) for _ in range(int(rng.integers(1, 11)))]
        for kind, magnitude, region in edits:
            engine.apply_edit(sid, kind, magnitude, region)
        payload = engine.get_session(sid)
        assert len(payload["rows"]) == len(edits) + 1

        # replay the chain outside the engine: stored beats must match bit
        # for bit, and stored neighbor sets must match fresh queries
        replayed = beat
        for i, (kind, magnitude, region) in enumerate(edits, start=1):
            t = Transformation(kind=TransformKind(kind), magnitude=magnitude,
                               region=Region(*region) if region else None)
            replayed = apply_transformation(replayed, t, new_id=f"{sid}:r{i}")
            row = payload["rows"][i]
            assert row["beat"]["samples"] == [float(v) for v in replayed.samples]
            _, emb = desk.bundle.forward_and_embed_batch(replayed.samples[None, :])
            ns = query_neighbors(desk.index, emb[0], k=50, query_ref=replayed.id)
            assert [(n["beat_id"], n["rank"], n["distance"])
                    for n in row["neighbors"]["neighbors"]] == [
                (n.beat_id, n.rank, n.distance) for n in ns.neighbors]

        # links against a set-intersection oracle over every adjacent pair
        for upper in range(len(payload["rows"]) - 1):
            got = engine.links(sid, upper=upper)["links"]
            upper_ns = payload["rows"][upper]["neighbors"]["neighbors"]
            lower_ns = payload["rows"][upper + 1]["neighbors"]["neighbors"]
            lower_rank = {n["beat_id"]: n["rank"] for n in lower_ns}
            oracle = [
                {"beat_id": n["beat_id"], "rank_in_upper": n["rank"],
                 "rank_in_lower": lower_rank[n["beat_id"]]}
                for n in upper_ns if n["beat_id"] in lower_rank
            ]
            assert got == oracle
            assert {l["beat_id"] for l in got} == (
                {n["beat_id"] for n in upper_ns} & {n["beat_id"] for n in lower_ns})
    print("ACCEPTANCE PASS: session chains recompute bit-exactly; links equal intersection")


def test_identity_edit_keeps_fifty_links_rank_for_rank(desk):
    engine = desk_engine(desk)
    sid = engine.create_session(desk.test.beats[0].id)["session_id"]
    # round(100 * 1.004) == 100: the region resamples onto itself
    payload = engine.apply_edit(sid, "stretch", 1.004, (10, 110))
    assert payload["rows"][1]["beat"]["samples"] == payload["rows"][0]["beat"]["samples"]
    links = engine.links(sid)["links"]
    assert len(links) == 50
    assert all(l["rank_in_upper"] == l["rank_in_lower"] for l in links)
    print("ACCEPTANCE PASS: identity edit keeps all 50 links rank-preserving")


# -- API determinism ----------------------------------------------------

def api_script(client):
    out = []

    def do(method, url, **kw):
        r = client.request(method, url, **kw)
        out.append((url, r.status_code, r.content))
        return r

    do("GET", "/beats", params={"page_size": 6})
    do("GET", "/beats", params={"label": "fusion"})
    sid = do("POST", "/sessions", json={"beat_id": "test-00001"}).json()["session_id"]
    do("POST", f"/sessions/{sid}/edits", json={"kind": "amplify", "magnitude": 1.3})
    do("POST", f"/sessions/{sid}/edits",
       json={"kind": "compress", "magnitude": 0.7, "region": [40, 140]})
    do("GET", f"/sessions/{sid}")
    do("GET", f"/sessions/{sid}/links")
    do("GET", f"/sessions/{sid}/links", params={"upper": 0})
    do("GET", f"/sessions/{sid}/overlay")
    do("GET", f"/sessions/{sid}/overlay", params={"row": 1, "from": 2, "to": 9})
    do("GET", "/beats/test-00003/baseline")
    return out


def test_every_endpoint_is_byte_deterministic(desk):
    first = api_script(TestClient(create_app(desk_engine(desk, lime_samples=200))))
    second = api_script(TestClient(create_app(desk_engine(desk, lime_samples=200))))
    assert [(u, s) for u, s, _ in first] == [(u, s) for u, s, _ in second]
    for (url, _, a), (_, _, b) in zip(first, second):
        assert a == b, f"response bytes differ for {url}"
    print(f"ACCEPTANCE PASS: {len(first)} endpoint responses byte-identical across engines")


# -- curated pool -------------------------------------------------------

def curate_via_cli(desk, capsys, tmp_path, dataset_path):
    pool_path = tmp_path / "pool.json"
    assert cli_main([
        "curate", "--dataset", str(dataset_path), "--weights", str(desk.paths["weights"]),
        "--index", str(desk.paths["index"]), "--out", str(pool_path), "--seed", "3",
    ]) == 0
    err = capsys.readouterr().err
    return json.loads(pool_path.read_text()), err


def test_curated_pool_composition_and_incorrect_quota(desk, capsys, tmp_path):
    manifest, err = curate_via_cli(desk, capsys, tmp_path, desk.paths["test"])
    assert len(manifest["beats"]) == 12
    per_class = {}
    for entry in manifest["beats"]:
        per_class[entry["label"]["code"]] = per_class.get(entry["label"]["code"], 0) + 1
    assert per_class == {0: 3, 1: 3, 2: 3, 3: 3}
    if manifest["achieved_incorrect_fraction"] < 0.3:
        # the trained model does not permit the quota on this corpus; the
        # curator must say so instead of silently under-filling
        assert err.startswith("warning: ")

    # a split whose labels all disagree with the model realizes the quota
    rotated = [
        beat.with_samples(beat.samples, new_id=beat.id,
                          label=ClassLabel((int(beat.label) + 1) % 4))
        for beat in desk.test.beats
    ]
    rotated_path = tmp_path / "rotated.csv"
    save_dataset(Dataset.from_beats(rotated, split="test"), str(rotated_path))
    manifest, err = curate_via_cli(desk, capsys, tmp_path, rotated_path)
    assert len(manifest["beats"]) == 12
    assert manifest["achieved_incorrect_fraction"] >= 0.3
    assert err == ""
    incorrect = sum(1 for entry in manifest["beats"] if not entry["majority_correct"])
    assert incorrect / 12 >= 0.3
    print("ACCEPTANCE PASS: curated pool is 12 beats, 3 per class, quota and warning paths hold")
