"""Trainable classifiers: logistic regression, RFF-SVM, and a 1-D CNN."""
from __future__ import annotations

import numpy as np

from .checkpoint import (
    CheckpointError,
    load_checkpoint,
    load_vocab,
    save_checkpoint,
    save_vocab,
    vocab_sibling,
)
from .cnn import CnnModel, init_cnn, loss_and_grads, predict_cnn, train_cnn
from .common import (
    Adam,
    DimensionMismatch,
    InputTooShort,
    Prediction,
    ShapeMismatch,
    SingleClass,
    TooFewSamples,
    TrainConfig,
    sigmoid,
)
from .logreg import (
    LogRegModel,
    logreg_gradient,
    logreg_objective,
    predict_logreg,
    train_logreg,
)
from .rffsvm import RffSvmModel, draw_rff, predict_svm, rff_transform, train_svm_rff
from .search import grid_search_cv, stratified_folds

__all__ = [
    "Adam",
    "CheckpointError",
    "CnnModel",
    "DimensionMismatch",
    "InputTooShort",
    "LogRegModel",
    "Prediction",
    "RffSvmModel",
    "ShapeMismatch",
    "SingleClass",
    "TooFewSamples",
    "TrainConfig",
    "draw_rff",
    "grid_search_cv",
    "init_cnn",
    "load_checkpoint",
    "load_vocab",
    "logreg_gradient",
    "logreg_objective",
    "loss_and_grads",
    "predict",
    "predict_cnn",
    "predict_logreg",
    "predict_svm",
    "rff_transform",
    "save_checkpoint",
    "save_vocab",
    "sigmoid",
    "stratified_folds",
    "train_cnn",
    "train_logreg",
    "train_svm_rff",
    "vocab_sibling",
]


def predict(model, x) -> Prediction:
    """Calibrated class-1 probability and label for any model family.

    Logistic and SVM models label 1 whenever p1 >= 0.5; the CNN labels by
    argmax over its two sigmoid outputs, so an exact tie keeps class 0.
    """
    if isinstance(model, LogRegModel):
        p1 = predict_logreg(model, x)
        return Prediction(p1=p1, label=int(p1 >= 0.5))
    if isinstance(model, RffSvmModel):
        p1 = predict_svm(model, x)
        return Prediction(p1=p1, label=int(p1 >= 0.5))
    if isinstance(model, CnnModel):
        p1, label = predict_cnn(model, np.asarray(x, dtype=float))
        return Prediction(p1=p1, label=label)
    raise DimensionMismatch(f"unsupported model type: {type(model).__name__}")
