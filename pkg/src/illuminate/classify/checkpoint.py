"""JSON checkpoint container for trained models.

Layout: {family, hyperparams, shapes, params (row-major lists),
vocab_fingerprint?, embedding_fingerprint?}.  The vocabulary itself is
stored in a sibling file so a checkpoint can verify it was paired with
the vocabulary it was trained against.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import IlluminateError
from ..textprep import Vocabulary
from .cnn import CnnModel
from .logreg import LogRegModel
from .rffsvm import RffSvmModel


class CheckpointError(IlluminateError):
    pass


def _fingerprint(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def vocab_to_json(vocab: Vocabulary) -> str:
    return json.dumps(
        {
            "index": vocab.index,
            "df": vocab.df,
            "total_docs": vocab.total_docs,
            "cap": vocab.cap,
        },
        sort_keys=True,
    )


def save_vocab(vocab: Vocabulary, path: str | Path) -> str:
    """Write the vocabulary JSON and return its fingerprint."""
    blob = vocab_to_json(vocab)
    Path(path).write_text(blob, encoding="utf-8")
    return _fingerprint(blob.encode("utf-8"))


def load_vocab(path: str | Path) -> tuple[Vocabulary, str]:
    blob = Path(path).read_text(encoding="utf-8")
    raw = json.loads(blob)
    vocab = Vocabulary(
        index={k: int(v) for k, v in raw["index"].items()},
        df={k: int(v) for k, v in raw["df"].items()},
        total_docs=int(raw["total_docs"]),
        cap=int(raw["cap"]),
    )
    return vocab, _fingerprint(blob.encode("utf-8"))


def _pack(arr: np.ndarray) -> list:
    return np.asarray(arr, dtype=float).ravel().tolist()


def model_to_container(
    model,
    vocab_fingerprint: str | None = None,
    embedding_fingerprint: str | None = None,
) -> dict:
    if isinstance(model, LogRegModel):
        body = {
            "family": "logreg",
            "hyperparams": {"C": model.C},
            "shapes": {"weights": list(model.weights.shape), "bias": []},
            "params": {"weights": _pack(model.weights), "bias": model.bias},
        }
    elif isinstance(model, RffSvmModel):
        body = {
            "family": "rff_svm",
            "hyperparams": {
                "C": model.C,
                "gamma": model.gamma,
                "D": model.omega.shape[0],
            },
            "shapes": {
                "omega": list(model.omega.shape),
                "phases": list(model.phases.shape),
                "weights": list(model.weights.shape),
                "bias": [],
            },
            "params": {
                "omega": _pack(model.omega),
                "phases": _pack(model.phases),
                "weights": _pack(model.weights),
                "bias": model.bias,
            },
        }
    elif isinstance(model, CnnModel):
        body = {
            "family": "cnn",
            "hyperparams": {
                "max_len": model.max_len,
                "dim": model.dim,
                "dropout_rate": model.dropout_rate,
            },
            "shapes": {
                "conv1_w": list(model.conv1_w.shape),
                "conv1_b": list(model.conv1_b.shape),
                "conv2_w": list(model.conv2_w.shape),
                "conv2_b": list(model.conv2_b.shape),
                "dense_w": list(model.dense_w.shape),
                "dense_b": list(model.dense_b.shape),
            },
            "params": {
                "conv1_w": _pack(model.conv1_w),
                "conv1_b": _pack(model.conv1_b),
                "conv2_w": _pack(model.conv2_w),
                "conv2_b": _pack(model.conv2_b),
                "dense_w": _pack(model.dense_w),
                "dense_b": _pack(model.dense_b),
            },
        }
    else:
        raise CheckpointError(f"unknown model type: {type(model).__name__}")
    if vocab_fingerprint:
        body["vocab_fingerprint"] = vocab_fingerprint
    if embedding_fingerprint:
        body["embedding_fingerprint"] = embedding_fingerprint
    return body


def save_checkpoint(
    model,
    path: str | Path,
    vocab: Vocabulary | None = None,
    embedding_fingerprint: str | None = None,
) -> None:
    """Write the model container; a vocab goes to <path>.vocab.json."""
    path = Path(path)
    vocab_fp = None
    if vocab is not None:
        vocab_fp = save_vocab(vocab, vocab_sibling(path))
    body = model_to_container(model, vocab_fp, embedding_fingerprint)
    path.write_text(json.dumps(body, sort_keys=True), encoding="utf-8")


def vocab_sibling(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".vocab.json")


def _unpack(flat, shape) -> np.ndarray:
    return np.asarray(flat, dtype=float).reshape(shape)


def load_checkpoint(path: str | Path) -> tuple[object, Vocabulary | None, dict]:
    """Load (model, paired vocabulary or None, raw container)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    family = raw.get("family")
    shapes = raw.get("shapes", {})
    params = raw.get("params", {})
    if family == "logreg":
        model = LogRegModel(
            weights=_unpack(params["weights"], shapes["weights"]),
            bias=float(params["bias"]),
            C=float(raw["hyperparams"]["C"]),
        )
    elif family == "rff_svm":
        model = RffSvmModel(
            omega=_unpack(params["omega"], shapes["omega"]),
            phases=_unpack(params["phases"], shapes["phases"]),
            weights=_unpack(params["weights"], shapes["weights"]),
            bias=float(params["bias"]),
            C=float(raw["hyperparams"]["C"]),
            gamma=float(raw["hyperparams"]["gamma"]),
        )
    elif family == "cnn":
        hp = raw["hyperparams"]
        model = CnnModel(
            conv1_w=_unpack(params["conv1_w"], shapes["conv1_w"]),
            conv1_b=_unpack(params["conv1_b"], shapes["conv1_b"]),
            conv2_w=_unpack(params["conv2_w"], shapes["conv2_w"]),
            conv2_b=_unpack(params["conv2_b"], shapes["conv2_b"]),
            dense_w=_unpack(params["dense_w"], shapes["dense_w"]),
            dense_b=_unpack(params["dense_b"], shapes["dense_b"]),
            max_len=int(hp["max_len"]),
            dim=int(hp["dim"]),
            dropout_rate=float(hp.get("dropout_rate", 0.30)),
        )
    else:
        raise CheckpointError(f"unknown checkpoint family: {family!r}")

    vocab = None
    sibling = vocab_sibling(path)
    if sibling.exists():
        vocab, fp = load_vocab(sibling)
        expected = raw.get("vocab_fingerprint")
        if expected and expected != fp:
            raise CheckpointError(
                f"vocabulary fingerprint mismatch for {sibling.name}"
            )
    return model, vocab, raw
