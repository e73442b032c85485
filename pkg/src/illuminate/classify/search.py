"""Stratified k-fold cross-validated grid search."""
from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from ..metrics import prf_report
from .common import TooFewSamples


def stratified_folds(y: Sequence[int], k: int, seed: int) -> list[np.ndarray]:
    """Indices for k folds with per-class round-robin assignment."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(y.tolist())):
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        for i, idx in enumerate(members):
            folds[i % k].append(int(idx))
    return [np.array(sorted(f)) for f in folds]


def _default_metric(preds: Sequence[int], gold: Sequence[int]) -> float:
    return prf_report(preds, gold).f1


def grid_search_cv(
    trainer: Callable,
    grid: Sequence[Mapping],
    k: int,
    X,
    y,
    metric: Callable[[Sequence[int], Sequence[int]], float] | None = None,
    predict: Callable | None = None,
    seed: int = 0,
) -> tuple[Mapping, list[float]]:
    """Mean validation score per grid point; best point wins, earliest on ties.

    trainer(X_train, y_train, **point) must return a model that the
    `predict` callable maps to 0/1 labels (defaults to this package's
    predict() on each row).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not grid:
        raise ValueError("grid must be non-empty")
    n = len(X) if not isinstance(X, np.ndarray) else X.shape[0]
    if n < k:
        raise TooFewSamples(f"{n} samples cannot fill {k} folds")
    if predict is None:
        from . import predict as predict_one

        predict = lambda model, rows: [predict_one(model, r).label for r in rows]
    score_fn = metric or _default_metric

    X_arr = X if isinstance(X, np.ndarray) else list(X)
    y_arr = np.asarray(y)
    folds = stratified_folds(y_arr, k, seed)

    def take(rows, idx):
        if isinstance(rows, np.ndarray):
            return rows[idx]
        return [rows[i] for i in idx]

    scores: list[float] = []
    for point in grid:
        fold_scores = []
        for i, val_idx in enumerate(folds):
            train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
            model = trainer(take(X_arr, train_idx), y_arr[train_idx], **point)
            preds = predict(model, take(X_arr, val_idx))
            fold_scores.append(score_fn(preds, y_arr[val_idx].tolist()))
        scores.append(float(np.mean(fold_scores)))

    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return grid[best], scores
