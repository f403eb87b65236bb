"""The residual conv classifier: init, forward, embeddings, backprop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..signals import Beat, ClassLabel
from .config import ModelConfig
from . import layers


class ModelNumericsError(RuntimeError):
    """Non-finite values in a forward pass; usually corrupted weights."""


def init_params(config: ModelConfig, dtype=np.float32) -> Dict[str, np.ndarray]:
    """He-normal weights, zero biases, seeded from config.seed."""
    rng = np.random.default_rng(config.seed)
    params: Dict[str, np.ndarray] = {}

    def conv(name: str, c_in: int, c_out: int) -> None:
        fan_in = c_in * config.kernel_size
        params[f"{name}/w"] = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                                         size=(c_out, c_in, config.kernel_size)).astype(dtype)
        params[f"{name}/b"] = np.zeros(c_out, dtype=dtype)

    def fc(name: str, d_in: int, d_out: int) -> None:
        params[f"{name}/w"] = rng.normal(0.0, np.sqrt(2.0 / d_in), size=(d_in, d_out)).astype(dtype)
        params[f"{name}/b"] = np.zeros(d_out, dtype=dtype)

    conv("conv0", 1, config.filters)
    for i in range(config.conv_blocks):
        conv(f"block{i}/conv1", config.filters, config.filters)
        conv(f"block{i}/conv2", config.filters, config.filters)
    fc("dense1", config.flatten_dim, config.dense_units)
    fc("dense2", config.dense_units, config.dense_units)
    fc("logits", config.dense_units, config.num_classes)
    return params


def expected_param_shapes(config: ModelConfig) -> Dict[str, tuple[int, ...]]:
    shapes: Dict[str, tuple[int, ...]] = {
        "conv0/w": (config.filters, 1, config.kernel_size),
        "conv0/b": (config.filters,),
    }
    for i in range(config.conv_blocks):
        for c in ("conv1", "conv2"):
            shapes[f"block{i}/{c}/w"] = (config.filters, config.filters, config.kernel_size)
            shapes[f"block{i}/{c}/b"] = (config.filters,)
    shapes["dense1/w"] = (config.flatten_dim, config.dense_units)
    shapes["dense1/b"] = (config.dense_units,)
    shapes["dense2/w"] = (config.dense_units, config.dense_units)
    shapes["dense2/b"] = (config.dense_units,)
    shapes["logits/w"] = (config.dense_units, config.num_classes)
    shapes["logits/b"] = (config.num_classes,)
    return shapes


def _forward(params: Dict[str, np.ndarray], config: ModelConfig, x2d: np.ndarray,
             keep_cache: bool = False):
    """Run the network on a (N, L) batch.

    Returns (logits, taps, caches): taps holds the embedding candidates,
    caches everything backward needs (None unless keep_cache).
    """
    n = x2d.shape[0]
    taps: Dict[str, np.ndarray] = {"input": x2d}
    caches: list[Any] = []
    x = x2d[:, None, :]  # (N, 1, L)

    h, c = layers.conv1d_same(x, params["conv0/w"], params["conv0/b"])
    caches.append(c)
    for i in range(config.conv_blocks):
        skip = h
        a, c1 = layers.conv1d_same(h, params[f"block{i}/conv1/w"], params[f"block{i}/conv1/b"])
        r, cr1 = layers.relu(a)
        b2, c2 = layers.conv1d_same(r, params[f"block{i}/conv2/w"], params[f"block{i}/conv2/b"])
        s = b2 + skip
        r2, cr2 = layers.relu(s)
        h, cp = layers.maxpool1d(r2, config.pool_size, config.pool_stride)
        caches.append((c1, cr1, c2, cr2, cp))

    flat = h.reshape(n, -1)
    taps["flatten"] = flat
    d1, cd1 = layers.dense(flat, params["dense1/w"], params["dense1/b"])
    r_d1, crd1 = layers.relu(d1)
    taps["dense1"] = r_d1
    d2, cd2 = layers.dense(r_d1, params["dense2/w"], params["dense2/b"])
    r_d2, crd2 = layers.relu(d2)
    taps["dense2"] = r_d2
    logits, cl = layers.dense(r_d2, params["logits/w"], params["logits/b"])
    caches.extend([h.shape, cd1, crd1, cd2, crd2, cl])
    return logits, taps, (caches if keep_cache else None)


def loss_and_grads(params: Dict[str, np.ndarray], config: ModelConfig,
                   x2d: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy and its gradient w.r.t. every parameter."""
    logits, _, caches = _forward(params, config, x2d, keep_cache=True)
    loss, probs, dlogits = layers.softmax_cross_entropy(logits, labels)
    grads: Dict[str, np.ndarray] = {}

    *block_caches, conv_shape, cd1, crd1, cd2, crd2, cl = caches
    conv0_cache = block_caches[0]
    residual_caches = block_caches[1:]

    dr_d2, grads["logits/w"], grads["logits/b"] = layers.dense_backward(dlogits, cl)
    dd2 = layers.relu_backward(dr_d2, crd2)
    dr_d1, grads["dense2/w"], grads["dense2/b"] = layers.dense_backward(dd2, cd2)
    dd1 = layers.relu_backward(dr_d1, crd1)
    dflat, grads["dense1/w"], grads["dense1/b"] = layers.dense_backward(dd1, cd1)
    dh = dflat.reshape(conv_shape)

    for i in reversed(range(config.conv_blocks)):
        c1, cr1, c2, cr2, cp = residual_caches[i]
        dr2 = layers.maxpool1d_backward(dh, cp)
        ds = layers.relu_backward(dr2, cr2)
        dr, dw2, db2 = layers.conv1d_same_backward(ds, c2)
        grads[f"block{i}/conv2/w"] = dw2
        grads[f"block{i}/conv2/b"] = db2
        da = layers.relu_backward(dr, cr1)
        dh_main, dw1, db1 = layers.conv1d_same_backward(da, c1)
        grads[f"block{i}/conv1/w"] = dw1
        grads[f"block{i}/conv1/b"] = db1
        dh = dh_main + ds  # skip connection

    dx, grads["conv0/w"], grads["conv0/b"] = layers.conv1d_same_backward(dh, conv0_cache)
    return loss, probs, grads


@dataclass(frozen=True)
class PredictionResult:
    """Softmax probabilities and the argmax class (ties go to the lowest code)."""

    probabilities: tuple[float, float, float, float]
    predicted: ClassLabel


@dataclass(frozen=True)
class Embedding:
    """Activation vector of the configured hidden layer."""

    vector: np.ndarray

    def __post_init__(self) -> None:
        vector = np.ascontiguousarray(self.vector)
        if not np.all(np.isfinite(vector)):
            raise ModelNumericsError("embedding contains non-finite values")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)

    def __len__(self) -> int:
        return int(self.vector.size)


@dataclass
class ModelBundle:
    """Immutable-after-construction trained model: config + weights + meta."""

    config: ModelConfig
    params: Dict[str, np.ndarray]
    training_meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = expected_param_shapes(self.config)
        if set(self.params) != set(expected):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise ValueError(f"parameter set mismatch: missing {missing}, unexpected {extra}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(
                    f"layer {name!r}: shape {self.params[name].shape} does not match config {shape}"
                )
        for arr in self.params.values():
            arr.setflags(write=False)

    @property
    def dtype(self):
        return self.params["conv0/w"].dtype

    @property
    def embedding_dim(self) -> int:
        return self.config.embedding_dim

    @property
    def fingerprint(self) -> str:
        cached = getattr(self, "_fingerprint", None)
        if cached is None:
            from . import weights_io

            cached = weights_io.bundle_fingerprint(self)
            self._fingerprint = cached
        return cached

    def _as_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.config.input_length:
            raise ValueError(
                f"input length {x.shape[-1]} does not match model input_length "
                f"{self.config.input_length}"
            )
        return x

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Softmax probabilities for a (N, L) batch."""
        logits, _, _ = _forward(self.params, self.config, self._as_batch(x))
        if not np.all(np.isfinite(logits)):
            raise ModelNumericsError("non-finite activation in forward pass")
        return layers.softmax(logits)

    def embed_batch(self, x: np.ndarray) -> np.ndarray:
        logits, taps, _ = _forward(self.params, self.config, self._as_batch(x))
        emb = taps[self.config.embedding_layer]
        if not np.all(np.isfinite(emb)):
            raise ModelNumericsError("non-finite activation in embedding pass")
        return emb

    def forward_and_embed_batch(self, x: np.ndarray):
        """Single pass producing both probabilities and embeddings."""
        logits, taps, _ = _forward(self.params, self.config, self._as_batch(x))
        if not np.all(np.isfinite(logits)):
            raise ModelNumericsError("non-finite activation in forward pass")
        return layers.softmax(logits), taps[self.config.embedding_layer]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Batch probabilities as float64 (the interchange dtype)."""
        return self.forward_batch(x).astype(np.float64)

    def forward(self, beat: Beat) -> PredictionResult:
        probs = self.forward_batch(beat.samples)[0].astype(np.float64)
        predicted = ClassLabel(int(np.argmax(probs)))
        return PredictionResult(probabilities=tuple(float(p) for p in probs), predicted=predicted)

    def embed(self, beat: Beat) -> Embedding:
        return Embedding(vector=self.embed_batch(beat.samples)[0])
