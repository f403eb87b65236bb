"""Forward/backward primitives for the 1D CNN, written against plain numpy.

Conventions: activations are (batch, channels, length) arrays; every forward
function returns (output, cache) and the matching backward consumes the cache
and the upstream gradient.  All math runs in the dtype of the weights, so the
same code serves float32 training and float64 gradient checking.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv1d_same(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Cross-correlation with zero 'same' padding.

    x: (N, C_in, L), w: (C_out, C_in, K), b: (C_out,) -> (N, C_out, L).
    """
    k = w.shape[2]
    pad_left = (k - 1) // 2
    pad_right = k - 1 - pad_left
    xp = np.pad(x, ((0, 0), (0, 0), (pad_left, pad_right)))
    cols = sliding_window_view(xp, k, axis=2)  # (N, C_in, L, K)
    y = np.einsum("nclk,ock->nol", cols, w, optimize=True) + b[None, :, None]
    return y, (cols, w, x.shape)


def conv1d_same_backward(dy: np.ndarray, cache):
    cols, w, x_shape = cache
    k = w.shape[2]
    pad_left = (k - 1) // 2
    db = dy.sum(axis=(0, 2))
    dw = np.einsum("nclk,nol->ock", cols, dy, optimize=True)
    # dx is the correlation of dy with the kernel flipped in tap order and
    # transposed in channels, evaluated over the padded extent.
    dyp = np.pad(dy, ((0, 0), (0, 0), (k - 1, k - 1)))
    windows = sliding_window_view(dyp, k, axis=2)  # (N, C_out, L + K - 1, K)
    w_flipped = w[:, :, ::-1]
    dxp = np.einsum("nojk,ock->ncj", windows, w_flipped, optimize=True)
    length = x_shape[2]
    dx = dxp[:, :, pad_left : pad_left + length]
    return dx, dw, db


def relu(x: np.ndarray):
    y = np.maximum(x, 0.0)
    return y, (x > 0.0)


def relu_backward(dy: np.ndarray, cache):
    return dy * cache


def maxpool1d(x: np.ndarray, size: int, stride: int):
    """Max pooling over the last axis; ties resolve to the first position."""
    n, c, length = x.shape
    out_length = (length - size) // stride + 1
    windows = sliding_window_view(x, size, axis=2)[:, :, ::stride, :]  # (N, C, Lout, size)
    arg = windows.argmax(axis=3)
    y = np.take_along_axis(windows, arg[..., None], axis=3)[..., 0]
    return y, (arg, x.shape, size, stride, out_length)


def maxpool1d_backward(dy: np.ndarray, cache):
    arg, x_shape, size, stride, out_length = cache
    n, c, length = x_shape
    dx = np.zeros(x_shape, dtype=dy.dtype)
    # Source positions in the unpooled signal; overlapping windows accumulate.
    base = np.arange(out_length) * stride
    src = base[None, None, :] + arg  # (N, C, Lout)
    n_idx = np.arange(n)[:, None, None]
    c_idx = np.arange(c)[None, :, None]
    np.add.at(dx, (n_idx, c_idx, src), dy)
    return dx


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """x: (N, D_in), w: (D_in, D_out), b: (D_out,)."""
    y = x @ w + b
    return y, (x, w)


def dense_backward(dy: np.ndarray, cache):
    x, w = cache
    dw = x.T @ dy
    db = dy.sum(axis=0)
    dx = dy @ w.T
    return dx, dw, db


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch; returns (loss, probs, dlogits)."""
    n = logits.shape[0]
    probs = softmax(logits)
    eps = np.finfo(logits.dtype).tiny
    losses = -np.log(np.maximum(probs[np.arange(n), labels], eps))
    loss = float(losses.mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, probs, dlogits
