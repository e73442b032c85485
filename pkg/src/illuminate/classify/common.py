"""Shared training config, Adam optimizer, and the prediction type."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import IlluminateError


class SingleClass(IlluminateError):
    pass


class DimensionMismatch(IlluminateError):
    pass


class ShapeMismatch(IlluminateError):
    pass


class InputTooShort(IlluminateError):
    pass


class TooFewSamples(IlluminateError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer schedule shared by all trainable models."""

    seed: int = 0
    epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class Prediction:
    p1: float
    label: int


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    arr = np.asarray(z, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    pos = flat >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
    ez = np.exp(flat[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out.reshape(arr.shape)


class Adam:
    """Adam updates over a list of parameter arrays, applied in place."""

    def __init__(self, params: Sequence[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        c = self.cfg
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = c.beta1 * self.m[i] + (1 - c.beta1) * g
            self.v[i] = c.beta2 * self.v[i] + (1 - c.beta2) * (g * g)
            m_hat = self.m[i] / (1 - c.beta1**self.t)
            v_hat = self.v[i] / (1 - c.beta2**self.t)
            p -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)


def as_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Accept a dense matrix or a list of sparse {index: weight} rows."""
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d matrix, got ndim={X.ndim}")
        return X.astype(float)
    rows = list(X)
    if rows and isinstance(rows[0], dict):
        if n_features is None:
            n_features = 1 + max((max(r) for r in rows if r), default=-1)
        dense = np.zeros((len(rows), n_features))
        for i, row in enumerate(rows):
            for j, w in row.items():
                if j >= n_features:
                    raise DimensionMismatch(
                        f"feature index {j} outside width {n_features}"
                    )
                dense[i, j] = w
        return dense
    return np.asarray(rows, dtype=float)


def check_xy(X: np.ndarray, y: Sequence[int]) -> np.ndarray:
    y = np.asarray(y, dtype=int)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} samples vs {y.shape[0]} labels")
    if X.shape[0] < 2:
        raise DimensionMismatch("need at least 2 samples")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")
    return y


def minibatches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]
