"""Record live API responses as JSON fixtures for the web client's tests.

Builds a small but fully real serving stack in-process (synthetic corpus,
briefly trained model, index, engine), replays a fixed request script
against it, and writes each response body byte-for-byte to
frontend/fixtures/.  Everything is seeded, so reruns reproduce identical
files; the web client's component tests consume these without the Python
service running.

Usage: python3 scripts/record_ui_fixtures.py [--out frontend/fixtures]
"""

import argparse
import json
from pathlib import Path

from fastapi.testclient import TestClient

from beatlens.model import ModelConfig, train
from beatlens.neighbors import build_index
from beatlens.service import ExplainEngine, create_app
from beatlens.synth import SynthSpec, generate_split


def build_client():
    spec = SynthSpec(length=64)
    train_set = generate_split(80, "train", seed=1, spec=spec)
    pool_set = generate_split(24, "test", seed=2, spec=spec)
    config = ModelConfig(input_length=64, conv_blocks=2, filters=8, dense_units=16, seed=3)
    bundle = train(train_set, config, epochs=2)
    index = build_index(bundle, train_set)

    tick = iter(float(t) for t in range(1_700_000_000, 1_700_100_000))
    engine = ExplainEngine(bundle, index, train_set, list(pool_set.beats),
                           k=50, lime_samples=200, lime_segments=8,
                           clock=lambda: next(tick))
    return TestClient(create_app(engine))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="frontend/fixtures")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    client = build_client()
    recorded = {}

    def record(name, method, url, **kw):
        response = client.request(method, url, **kw)
        (out / f"{name}.json").write_bytes(response.content)
        recorded[name] = response
        print(f"{name}.json  {method} {url}  -> {response.status_code}"
              f"  {len(response.content)} bytes")
        return response

    record("beats", "GET", "/beats", params={"page_size": 12})
    record("session_fresh", "POST", "/sessions", json={"beat_id": "test-00002"})
    sid = recorded["session_fresh"].json()["session_id"]
    record("session_one_edit", "POST", f"/sessions/{sid}/edits",
           json={"kind": "amplify", "magnitude": 1.3})
    record("session_edited", "POST", f"/sessions/{sid}/edits",
           json={"kind": "stretch", "magnitude": 1.5, "region": [8, 20]})
    record("links", "GET", f"/sessions/{sid}/links")
    record("overlay", "GET", f"/sessions/{sid}/overlay")
    record("baseline", "GET", "/beats/test-00005/baseline")
    record("error_not_found", "GET", "/sessions/s-999999")
    record("error_bad_edit", "POST", f"/sessions/{sid}/edits",
           json={"kind": "amplify", "magnitude": 0.4})

    # an identity edit in a second session: every neighbor keeps its rank,
    # so all 50 links come back straight
    second = client.post("/sessions", json={"beat_id": "test-00007"}).json()["session_id"]
    client.post(f"/sessions/{second}/edits",
                json={"kind": "stretch", "magnitude": 1.1, "region": [10, 13]})
    record("links_identity", "GET", f"/sessions/{second}/links")

    manifest = {name: f"{name}.json" for name in sorted(recorded)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(recorded) + 1} files to {out}")


if __name__ == "__main__":
    main()
