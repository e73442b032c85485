"""L2-regularized logistic regression trained with mini-batch Adam."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import (
    Adam,
    DimensionMismatch,
    TrainConfig,
    as_matrix,
    check_xy,
    minibatches,
    sigmoid,
)


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    C: float


def logreg_objective(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """Mean binary cross-entropy plus (1 / 2C) * ||w||^2."""
    z = X @ weights + bias
    # log(1 + exp(-|z|)) form keeps the loss finite for large margins
    bce = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return float(np.mean(bce) + np.dot(weights, weights) / (2.0 * C))


def logreg_gradient(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, C: float
) -> tuple[np.ndarray, float]:
    z = X @ weights + bias
    err = sigmoid(z) - y
    grad_w = X.T @ err / X.shape[0] + weights / C
    grad_b = float(np.mean(err))
    return grad_w, grad_b


def train_logreg(X, y, cfg: TrainConfig, C: float = 1.0, n_features: int | None = None) -> LogRegModel:
    """Fit weights and bias by seeded mini-batch Adam.

    X may be a dense matrix or a list of sparse {index: weight} rows (pass
    n_features for sparse rows so trailing all-zero columns keep a slot).
    """
    if C <= 0:
        raise ValueError("C must be positive")
    Xm = as_matrix(X, n_features)
    ym = check_xy(Xm, y).astype(float)
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(Xm.shape[1])
    b = np.zeros(1)
    opt = Adam([w, b], cfg)
    for _ in range(cfg.epochs):
        for idx in minibatches(Xm.shape[0], cfg.batch_size, rng):
            gw, gb = logreg_gradient(w, b[0], Xm[idx], ym[idx], C)
            opt.step([w, b], [gw, np.array([gb])])
    return LogRegModel(weights=w, bias=float(b[0]), C=C)


def predict_logreg(model: LogRegModel, x) -> float:
    """Probability of class 1 for one feature vector."""
    if isinstance(x, dict):
        z = model.bias
        for i, v in x.items():
            if i >= model.weights.shape[0]:
                raise DimensionMismatch(f"feature index {i} outside model width")
            z += model.weights[i] * v
        return float(sigmoid(z))
    xv = np.asarray(x, dtype=float)
    if xv.shape != model.weights.shape:
        raise DimensionMismatch(f"expected {model.weights.shape}, got {xv.shape}")
    return float(sigmoid(xv @ model.weights + model.bias))
