"""Classification metrics, cosine similarity, and ROUGE scoring."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IlluminateError
from .textprep import EmbeddingTable, TokenDoc, fit_tfidf, preprocess, tfidf_transform

__all__ = [
    "ConfusionCounts",
    "MetricReport",
    "RougeScore",
    "prf_report",
    "cosine",
    "rouge_n",
    "rouge_l",
    "response_similarity",
    "LengthMismatch",
    "EmptyInput",
]


class LengthMismatch(IlluminateError):
    pass


class EmptyInput(IlluminateError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_pairs(cls, preds: Sequence[int], gold: Sequence[int]) -> "ConfusionCounts":
        tp = fp = fn = tn = 0
        for p, g in zip(preds, gold):
            if p == 1 and g == 1:
                tp += 1
            elif p == 1 and g == 0:
                fp += 1
            elif p == 0 and g == 1:
                fn += 1
            else:
                tn += 1
        return cls(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    zero_division_hit: bool
    counts: ConfusionCounts

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "zero_division_hit": self.zero_division_hit,
            "counts": {
                "tp": self.counts.tp,
                "fp": self.counts.fp,
                "fn": self.counts.fn,
                "tn": self.counts.tn,
            },
        }


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _safe_div(num: float, den: float) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def prf_report(preds: Sequence[int], gold: Sequence[int]) -> MetricReport:
    """Accuracy, precision, recall, and F1 for binary labels.

    Degenerate 0/0 ratios come back as 0.0 with zero_division_hit set.
    """
    if len(preds) != len(gold):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gold)} gold labels")
    if not preds:
        raise EmptyInput("no prediction pairs to score")
    c = ConfusionCounts.from_pairs(preds, gold)
    accuracy = (c.tp + c.tn) / c.total
    precision, p_zero = _safe_div(c.tp, c.tp + c.fp)
    recall, r_zero = _safe_div(c.tp, c.tp + c.fn)
    f1, f_zero = _safe_div(2 * precision * recall, precision + recall)
    return MetricReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        zero_division_hit=p_zero or r_zero or f_zero,
        counts=c,
    )


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine of the angle between two vectors; 0.0 if either is zero."""
    ua = np.asarray(u, dtype=float)
    va = np.asarray(v, dtype=float)
    if ua.shape != va.shape:
        raise LengthMismatch(f"vector lengths differ: {ua.shape} vs {va.shape}")
    nu = np.linalg.norm(ua)
    nv = np.linalg.norm(va)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(ua, va) / (nu * nv))


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _prf(overlap: float, n_cand: float, n_ref: float) -> RougeScore:
    precision = overlap / n_cand if n_cand else 0.0
    recall = overlap / n_ref if n_ref else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return RougeScore(precision=precision, recall=recall, f1=f1)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap between candidate and reference tokens."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok in a:
        cur = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if tok == other:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence overlap between token sequences."""
    lcs = _lcs_len(candidate, reference)
    return _prf(lcs, len(candidate), len(reference))


def _rouge_tokens(text: str) -> list[str]:
    return preprocess(text, stopwords=False, stemming=False).tokens


def rouge_text(candidate: str, reference: str, kind: str = "1") -> RougeScore:
    """ROUGE over raw strings; kind is "1", "2", or "l"."""
    cand = _rouge_tokens(candidate)
    ref = _rouge_tokens(reference)
    if kind == "l":
        return rouge_l(cand, ref)
    return rouge_n(cand, ref, int(kind))


def _mean_embedding(tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray | None:
    hits = [table.vectors[t] for t in tokens if t in table.vectors]
    if not hits:
        return None
    return np.mean(hits, axis=0)


def response_similarity(candidate: str, reference: str, table: EmbeddingTable) -> float:
    """Cosine between mean token embeddings of two texts.

    Falls back to cosine over pairwise-fitted tf-idf vectors when either
    text has no tokens covered by the table.
    """
    cand_tokens = _rouge_tokens(candidate)
    ref_tokens = _rouge_tokens(reference)
    cand_mean = _mean_embedding(cand_tokens, table)
    ref_mean = _mean_embedding(ref_tokens, table)
    if cand_mean is not None and ref_mean is not None:
        return cosine(cand_mean, ref_mean)
    docs = [
        TokenDoc(tokens=cand_tokens, original=candidate),
        TokenDoc(tokens=ref_tokens, original=reference),
    ]
    vocab = fit_tfidf(docs, cap=max(1, len(set(cand_tokens) | set(ref_tokens))))
    u = tfidf_transform(vocab, docs[0])
    v = tfidf_transform(vocab, docs[1])
    dense_u = np.zeros(vocab.size)
    dense_v = np.zeros(vocab.size)
    for i, w in u.items():
        dense_u[i] = w
    for i, w in v.items():
        dense_v[i] = w
    return cosine(dense_u, dense_v)
