"""Build a complete serving setup from nothing: corpus, model, index, pool.

Runs the same subcommands an operator would, in order, against a fresh
output directory.  The result is everything `beatlens serve` needs:

    artifacts/
      train.csv  test.csv   synthetic corpus (2000 / 400)
      model.blnw             trained default-config weights
      train.blni             embedding index over the train split
      eval.json              per-class accuracy report
      pool.json              curated 12-beat study pool
      service.conf           config file wiring it all together

Usage: python3 scripts/build_demo_artifacts.py [--out artifacts] [--epochs 10]
"""

import argparse
import sys
from pathlib import Path

from beatlens.cli import main as cli


def run(argv):
    print("+ beatlens " + " ".join(argv))
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="artifacts")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_csv = out / "train.csv"
    test_csv = out / "test.csv"
    weights = out / "model.blnw"
    index = out / "train.blni"

    run(["synth", "--train-out", str(train_csv), "--test-out", str(test_csv),
         "--seed", str(args.seed), "--check"])
    run(["train", "--dataset", str(train_csv), "--weights", str(weights),
         "--epochs", str(args.epochs)])
    run(["eval", "--dataset", str(test_csv), "--weights", str(weights),
         "--json-out", str(out / "eval.json")])
    run(["index", "--dataset", str(train_csv), "--weights", str(weights),
         "--index", str(index)])
    run(["curate", "--dataset", str(test_csv), "--weights", str(weights),
         "--index", str(index), "--out", str(out / "pool.json")])

    config = out / "service.conf"
    config.write_text(
        "# serving setup produced by scripts/build_demo_artifacts.py\n"
        f"weights_path = {weights}\n"
        f"index_path = {index}\n"
        f"train_path = {train_csv}\n"
        f"pool_dataset_path = {test_csv}\n"
        f"pool_manifest_path = {out / 'pool.json'}\n"
        f"sessions_dir = {out / 'sessions'}\n"
    )
    print(f"wrote {config}")
    print(f"serve with: beatlens serve --config {config}")


if __name__ == "__main__":
    main()
