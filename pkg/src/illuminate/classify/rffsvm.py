"""Linear SVM over random Fourier features approximating an RBF kernel.

Feature map: z(x) = sqrt(2/D) * cos(Omega x + beta) with Omega rows drawn
i.i.d. from N(0, 2*gamma*I), so z(x).z(y) approximates exp(-gamma*||x-y||^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import DimensionMismatch, TrainConfig, as_matrix, check_xy, minibatches, sigmoid


@dataclass
class RffSvmModel:
    omega: np.ndarray  # (D, d) projection
    phases: np.ndarray  # (D,) in [0, 2*pi)
    weights: np.ndarray  # (D,)
    bias: float
    C: float
    gamma: float

    @property
    def n_components(self) -> int:
        return self.omega.shape[0]


def rff_transform(omega: np.ndarray, phases: np.ndarray, X: np.ndarray) -> np.ndarray:
    D = omega.shape[0]
    return np.sqrt(2.0 / D) * np.cos(X @ omega.T + phases)


def draw_rff(d: int, D: int, gamma: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded draw of the projection matrix and phase offsets."""
    rng = np.random.default_rng(seed)
    omega = rng.normal(0.0, np.sqrt(2.0 * gamma), size=(D, d))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=D)
    return omega, phases


def train_svm_rff(
    X,
    y,
    cfg: TrainConfig,
    C: float = 1.0,
    gamma: float = 1.0,
    D: int = 512,
    n_features: int | None = None,
) -> RffSvmModel:
    """Hinge loss plus (1 / 2C) * ||v||^2, minimized by subgradient descent."""
    if C <= 0 or gamma <= 0:
        raise ValueError("C and gamma must be positive")
    if D < 1:
        raise ValueError("D must be >= 1")
    Xm = as_matrix(X, n_features)
    ym = check_xy(Xm, y)
    t = np.where(ym == 1, 1.0, -1.0)
    omega, phases = draw_rff(Xm.shape[1], D, gamma, cfg.seed)
    Z = rff_transform(omega, phases, Xm)
    rng = np.random.default_rng(cfg.seed + 1)
    v = np.zeros(D)
    b = 0.0
    for _ in range(cfg.epochs):
        for idx in minibatches(Z.shape[0], cfg.batch_size, rng):
            Zb, tb = Z[idx], t[idx]
            margins = tb * (Zb @ v + b)
            viol = margins < 1.0
            grad_v = v / C
            grad_b = 0.0
            if np.any(viol):
                grad_v = grad_v - (tb[viol, None] * Zb[viol]).sum(axis=0) / len(idx)
                grad_b = -float(tb[viol].sum()) / len(idx)
            v -= cfg.learning_rate * grad_v
            b -= cfg.learning_rate * grad_b
    return RffSvmModel(omega=omega, phases=phases, weights=v, bias=b, C=C, gamma=gamma)


def svm_margin(model: RffSvmModel, x) -> float:
    xv = np.asarray(x, dtype=float)
    if xv.ndim != 1 or xv.shape[0] != model.omega.shape[1]:
        raise DimensionMismatch(
            f"expected input dim {model.omega.shape[1]}, got shape {xv.shape}"
        )
    z = rff_transform(model.omega, model.phases, xv[None, :])[0]
    return float(z @ model.weights + model.bias)


def predict_svm(model: RffSvmModel, x) -> float:
    """Class-1 probability via the logistic link over the margin."""
    if isinstance(x, dict):
        dense = np.zeros(model.omega.shape[1])
        for i, w in x.items():
            if i >= dense.shape[0]:
                raise DimensionMismatch(f"feature index {i} outside model width")
            dense[i] = w
        x = dense
    return float(sigmoid(svm_margin(model, x)))
