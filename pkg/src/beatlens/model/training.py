"""Adam training loop and per-class evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..signals import ClassLabel, Dataset
from .config import ModelConfig
from .network import ModelBundle, init_params, loss_and_grads


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainParams:
    """Optimizer hyperparameters; lr_decay multiplies the rate each epoch."""

    learning_rate: float = 1e-3
    lr_decay: float = 1.0
    batch_size: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def _dataset_arrays(dataset: Dataset, dtype) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([beat.samples for beat in dataset.beats]).astype(dtype)
    y = np.array([int(beat.label) for beat in dataset.beats], dtype=np.int64)
    return x, y


def train(dataset: Dataset, config: ModelConfig, epochs: int,
          hyper: Optional[TrainParams] = None, dtype=np.float32) -> ModelBundle:
    """Train from a fresh init; deterministic for a fixed config.seed.

    epochs=0 returns the initialized model untouched.  A non-finite loss
    aborts with the offending epoch and batch.
    """
    if dataset.split != "train":
        raise ValueError(f"training expects the train split, got {dataset.split!r}")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if dataset.length != config.input_length:
        raise ValueError(
            f"dataset length {dataset.length} does not match config.input_length {config.input_length}"
        )
    hyper = hyper or TrainParams()

    params = init_params(config, dtype=dtype)
    x, y = _dataset_arrays(dataset, dtype)
    n = x.shape[0]
    rng = np.random.default_rng(config.seed)

    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(va) for k, va in params.items()}
    step = 0
    epoch_losses: list[float] = []
    lr = hyper.learning_rate

    for epoch in range(epochs):
        order = rng.permutation(n)
        batch_losses: list[float] = []
        for batch_index, start in enumerate(range(0, n, hyper.batch_size)):
            idx = order[start : start + hyper.batch_size]
            loss, _, grads = loss_and_grads(params, config, x[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_index)
            batch_losses.append(loss)
            step += 1
            bc1 = 1.0 - hyper.beta1**step
            bc2 = 1.0 - hyper.beta2**step
            for name, grad in grads.items():
                grad = grad.astype(params[name].dtype, copy=False)
                m[name] = hyper.beta1 * m[name] + (1.0 - hyper.beta1) * grad
                v[name] = hyper.beta2 * v[name] + (1.0 - hyper.beta2) * grad * grad
                update = lr * (m[name] / bc1) / (np.sqrt(v[name] / bc2) + hyper.eps)
                params[name] = params[name] - update.astype(params[name].dtype, copy=False)
        epoch_losses.append(float(np.mean(batch_losses)))
        lr *= hyper.lr_decay

    meta = {
        "epochs": epochs,
        "epoch_losses": epoch_losses,
        "final_loss": epoch_losses[-1] if epoch_losses else None,
        "train_size": n,
    }
    bundle = ModelBundle(config=config, params=params, training_meta=meta)
    if epochs > 0:
        report = evaluate(bundle, dataset)
        meta["train_accuracy"] = report.overall_accuracy
        meta["per_class_train_accuracy"] = {
            label.name: report.per_class_accuracy[label] for label in ClassLabel
        }
    return bundle


@dataclass(frozen=True)
class EvalReport:
    """Overall plus per-class accuracy, with class shares; absent classes are None."""

    n: int
    overall_accuracy: float
    class_counts: Dict[ClassLabel, int]
    class_shares: Dict[ClassLabel, float]
    per_class_accuracy: Dict[ClassLabel, Optional[float]]

    def format_table(self) -> str:
        rows = [("Class", "% of Examples", "Test Set Accuracy")]
        for label in ClassLabel:
            share = f"{100.0 * self.class_shares[label]:.1f}%"
            acc = self.per_class_accuracy[label]
            rows.append((label.display_name, share, "n/a" if acc is None else f"{100.0 * acc:.1f}%"))
        rows.append(("Overall", "--", f"{100.0 * self.overall_accuracy:.1f}%"))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = []
        for i, row in enumerate(rows):
            lines.append(" | ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
            if i == 0:
                lines.append("-+-".join("-" * w for w in widths))
        return "\n".join(lines)

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "overall_accuracy": self.overall_accuracy,
            "classes": [
                {
                    "code": int(label),
                    "name": label.display_name,
                    "count": self.class_counts[label],
                    "share": self.class_shares[label],
                    "accuracy": self.per_class_accuracy[label],
                }
                for label in ClassLabel
            ],
        }


def evaluate(bundle: ModelBundle, dataset: Dataset, batch_size: int = 256) -> EvalReport:
    """Accuracy report shaped like the per-class table: share and accuracy per class."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    x, y = _dataset_arrays(dataset, bundle.dtype)
    predicted = np.empty(len(y), dtype=np.int64)
    for start in range(0, len(y), batch_size):
        probs = bundle.forward_batch(x[start : start + batch_size])
        predicted[start : start + probs.shape[0]] = probs.argmax(axis=1)

    correct = predicted == y
    counts: Dict[ClassLabel, int] = {}
    shares: Dict[ClassLabel, float] = {}
    per_class: Dict[ClassLabel, Optional[float]] = {}
    for label in ClassLabel:
        mask = y == int(label)
        count = int(mask.sum())
        counts[label] = count
        shares[label] = count / len(y)
        per_class[label] = float(correct[mask].mean()) if count else None
    return EvalReport(
        n=len(y),
        overall_accuracy=float(correct.mean()),
        class_counts=counts,
        class_shares=shares,
        per_class_accuracy=per_class,
    )
