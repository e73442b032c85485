"""1-D convolutional net over embedded token sequences.

Architecture: conv(24 filters, width 10) -> relu -> maxpool(2) ->
conv(8 filters, width 5) -> relu -> maxpool(2) -> flatten ->
dropout(0.30, training only, inverted scaling) -> dense(2) -> sigmoid.
Loss is binary cross-entropy against one-hot targets; gradients are
computed by hand-written backpropagation and applied with Adam.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import Adam, InputTooShort, ShapeMismatch, TrainConfig, check_xy, sigmoid

FILTERS1 = 24
KERNEL1 = 10
FILTERS2 = 8
KERNEL2 = 5
POOL = 2
N_CLASSES = 2
DROPOUT_RATE = 0.30


@dataclass
class CnnModel:
    conv1_w: np.ndarray  # (24, 10, dim)
    conv1_b: np.ndarray  # (24,)
    conv2_w: np.ndarray  # (8, 5, 24)
    conv2_b: np.ndarray  # (8,)
    dense_w: np.ndarray  # (flat, 2)
    dense_b: np.ndarray  # (2,)
    max_len: int
    dim: int
    dropout_rate: float = DROPOUT_RATE

    @property
    def params(self) -> list[np.ndarray]:
        return [
            self.conv1_w,
            self.conv1_b,
            self.conv2_w,
            self.conv2_b,
            self.dense_w,
            self.dense_b,
        ]


def feature_lengths(max_len: int) -> tuple[int, int, int, int]:
    """Sequence lengths after each conv/pool stage."""
    l1 = max_len - KERNEL1 + 1
    p1 = l1 // POOL
    l2 = p1 - KERNEL2 + 1
    p2 = l2 // POOL
    return l1, p1, l2, p2


def init_cnn(max_len: int, dim: int, seed: int = 0) -> CnnModel:
    """Glorot-uniform filters, zero biases; validates the length budget."""
    l1, p1, l2, p2 = feature_lengths(max_len)
    if l1 < 1 or l2 < 1 or p2 < 1:
        raise InputTooShort(
            f"max_len={max_len} leaves no features after both conv/pool stages"
        )
    rng = np.random.default_rng(seed)

    def glorot(shape, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)

    flat = p2 * FILTERS2
    return CnnModel(
        conv1_w=glorot((FILTERS1, KERNEL1, dim), KERNEL1 * dim, KERNEL1 * FILTERS1),
        conv1_b=np.zeros(FILTERS1),
        conv2_w=glorot(
            (FILTERS2, KERNEL2, FILTERS1), KERNEL2 * FILTERS1, KERNEL2 * FILTERS2
        ),
        conv2_b=np.zeros(FILTERS2),
        dense_w=glorot((flat, N_CLASSES), flat, N_CLASSES),
        dense_b=np.zeros(N_CLASSES),
        max_len=max_len,
        dim=dim,
    )


def _im2col(X: np.ndarray, k: int) -> np.ndarray:
    # (B, T, C) -> (B, T-k+1, k*C), window j then channel c at [j*C + c]
    win = np.lib.stride_tricks.sliding_window_view(X, k, axis=1)  # (B, L, C, k)
    b, l, c, _ = win.shape
    return win.transpose(0, 1, 3, 2).reshape(b, l, k * c)


def _col2im(dcols: np.ndarray, k: int, t: int, c: int) -> np.ndarray:
    b, l, _ = dcols.shape
    folded = dcols.reshape(b, l, k, c)
    dX = np.zeros((b, t, c))
    for j in range(k):
        dX[:, j : j + l, :] += folded[:, :, j, :]
    return dX


def _pool_forward(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b, l, f = a.shape
    p = l // POOL
    trimmed = a[:, : p * POOL, :].reshape(b, p, POOL, f)
    idx = trimmed.argmax(axis=2)
    out = np.take_along_axis(trimmed, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return out, idx


def _pool_backward(dout: np.ndarray, idx: np.ndarray, l: int) -> np.ndarray:
    b, p, f = dout.shape
    dtrim = np.zeros((b, p, POOL, f))
    np.put_along_axis(dtrim, idx[:, :, None, :], dout[:, :, None, :], axis=2)
    da = np.zeros((b, l, f))
    da[:, : p * POOL, :] = dtrim.reshape(b, p * POOL, f)
    return da


def forward(
    model: CnnModel,
    X: np.ndarray,
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Batch forward pass; returns sigmoid outputs and the backprop cache.

    Pass dropout_mask (already inverted-scaled) to train; None runs the
    deterministic inference path.
    """
    if X.ndim != 3 or X.shape[1] != model.max_len or X.shape[2] != model.dim:
        raise ShapeMismatch(
            f"expected (batch, {model.max_len}, {model.dim}), got {X.shape}"
        )
    cols1 = _im2col(X, KERNEL1)
    a1 = cols1 @ model.conv1_w.reshape(FILTERS1, -1).T + model.conv1_b
    r1 = np.maximum(a1, 0.0)
    pooled1, idx1 = _pool_forward(r1)

    cols2 = _im2col(pooled1, KERNEL2)
    a2 = cols2 @ model.conv2_w.reshape(FILTERS2, -1).T + model.conv2_b
    r2 = np.maximum(a2, 0.0)
    pooled2, idx2 = _pool_forward(r2)

    flat = pooled2.reshape(X.shape[0], -1)
    dropped = flat if dropout_mask is None else flat * dropout_mask
    logits = dropped @ model.dense_w + model.dense_b
    s = sigmoid(logits)
    cache = {
        "cols1": cols1,
        "a1": a1,
        "idx1": idx1,
        "l1": r1.shape[1],
        "pooled1": pooled1,
        "cols2": cols2,
        "a2": a2,
        "idx2": idx2,
        "l2": r2.shape[1],
        "pooled2_shape": pooled2.shape,
        "dropped": dropped,
        "dropout_mask": dropout_mask,
        "logits": logits,
    }
    return s, cache


def bce_loss(logits: np.ndarray, targets: np.ndarray) -> float:
    """Mean element-wise binary cross-entropy computed from logits."""
    per = np.maximum(logits, 0) - logits * targets + np.log1p(np.exp(-np.abs(logits)))
    return float(per.mean())


def loss_and_grads(
    model: CnnModel,
    X: np.ndarray,
    targets: np.ndarray,
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, list[np.ndarray]]:
    """Loss plus gradients for every parameter array, in model.params order."""
    s, cache = forward(model, X, dropout_mask)
    loss = bce_loss(cache["logits"], targets)

    dlogits = (s - targets) / targets.size
    ddense_w = cache["dropped"].T @ dlogits
    ddense_b = dlogits.sum(axis=0)
    ddropped = dlogits @ model.dense_w.T
    dflat = (
        ddropped if cache["dropout_mask"] is None else ddropped * cache["dropout_mask"]
    )

    dpooled2 = dflat.reshape(cache["pooled2_shape"])
    dr2 = _pool_backward(dpooled2, cache["idx2"], cache["l2"])
    da2 = dr2 * (cache["a2"] > 0)
    b, l2, _ = da2.shape
    dconv2_w = (
        da2.reshape(b * l2, FILTERS2).T @ cache["cols2"].reshape(b * l2, -1)
    ).reshape(model.conv2_w.shape)
    dconv2_b = da2.sum(axis=(0, 1))
    dcols2 = da2 @ model.conv2_w.reshape(FILTERS2, -1)
    dpooled1 = _col2im(dcols2, KERNEL2, cache["pooled1"].shape[1], FILTERS1)

    dr1 = _pool_backward(dpooled1, cache["idx1"], cache["l1"])
    da1 = dr1 * (cache["a1"] > 0)
    b, l1, _ = da1.shape
    dconv1_w = (
        da1.reshape(b * l1, FILTERS1).T @ cache["cols1"].reshape(b * l1, -1)
    ).reshape(model.conv1_w.shape)
    dconv1_b = da1.sum(axis=(0, 1))

    return loss, [dconv1_w, dconv1_b, dconv2_w, dconv2_b, ddense_w, ddense_b]


def _as_batch(X) -> np.ndarray:
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return X.astype(float)
    mats = [np.asarray(m, dtype=float) for m in X]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise ShapeMismatch(f"input matrices disagree on shape: {sorted(shapes)}")
    return np.stack(mats)


def train_cnn(X, y, cfg: TrainConfig) -> CnnModel:
    """Train on a stack of (max_len, dim) matrices; deterministic per seed."""
    Xb = _as_batch(X)
    ym = check_xy(Xb, y)
    targets_all = np.eye(N_CLASSES)[ym]
    model = init_cnn(Xb.shape[1], Xb.shape[2], seed=cfg.seed)
    opt = Adam(model.params, cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    flat_dim = model.dense_w.shape[0]
    keep = 1.0 - model.dropout_rate
    for _ in range(cfg.epochs):
        order = rng.permutation(Xb.shape[0])
        for start in range(0, Xb.shape[0], cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            mask = (rng.random((len(idx), flat_dim)) < keep) / keep
            _, grads = loss_and_grads(model, Xb[idx], targets_all[idx], mask)
            opt.step(model.params, grads)
    return model


def predict_cnn(model: CnnModel, x: np.ndarray) -> tuple[float, int]:
    """Renormalized class-1 probability and argmax label (tie keeps 0)."""
    xv = np.asarray(x, dtype=float)
    if xv.ndim == 2:
        xv = xv[None, :, :]
    s, _ = forward(model, xv)
    s0, s1 = float(s[0, 0]), float(s[0, 1])
    p1 = s1 / (s0 + s1 + 1e-12)
    return p1, int(np.argmax([s0, s1]))
