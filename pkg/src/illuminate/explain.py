"""Local surrogate explanations for any probability-producing classifier.

A document is represented by its unique token types.  Random masks knock
out token types (all occurrences), the model rescores each masked text,
and a proximity-weighted ridge regression over the masks yields per-token
weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IlluminateError
from .textprep import TokenDoc

__all__ = [
    "Perturbation",
    "Explanation",
    "sample_perturbations",
    "explain",
    "EmptyDoc",
]

DEFAULT_SIGMA = 25.0


class EmptyDoc(IlluminateError):
    pass


@dataclass
class Perturbation:
    mask: np.ndarray  # one bit per unique token type, 1 = kept
    proximity: float
    p1: float | None = None


@dataclass
class Explanation:
    items: list[tuple[str, float]]  # (token, weight), sorted by |weight| desc
    intercept: float
    model_p1: float
    local_r2: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "tokens": [{"token": t, "weight": w} for t, w in self.items],
            "intercept": self.intercept,
            "model_p1": self.model_p1,
            "local_r2": self.local_r2,
        }


def unique_tokens(doc: TokenDoc) -> list[str]:
    """Token types in first-appearance order."""
    seen: dict[str, None] = {}
    for tok in doc.tokens:
        seen.setdefault(tok)
    return list(seen)


def _proximity(mask: np.ndarray, sigma: float) -> float:
    # cosine distance between the mask and the all-ones vector
    kept = int(mask.sum())
    d = 1.0 - np.sqrt(kept / mask.shape[0])
    return float(np.exp(-(d * d) / (sigma * sigma)))


def sample_perturbations(
    doc: TokenDoc, n: int, seed: int, sigma: float = DEFAULT_SIGMA
) -> list[Perturbation]:
    """Draw n masks; sample 0 is always the full document."""
    types = unique_tokens(doc)
    m = len(types)
    if m < 1:
        raise EmptyDoc("document has no tokens to perturb")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    samples = [Perturbation(mask=np.ones(m, dtype=np.uint8), proximity=1.0)]
    for _ in range(n - 1):
        k = int(rng.integers(1, m + 1))
        removed = rng.choice(m, size=k, replace=False)
        mask = np.ones(m, dtype=np.uint8)
        mask[removed] = 0
        samples.append(Perturbation(mask=mask, proximity=_proximity(mask, sigma)))
    return samples


def masked_text(doc: TokenDoc, mask: np.ndarray, types: Sequence[str]) -> str:
    kept = {t for t, bit in zip(types, mask) if bit}
    return " ".join(tok for tok in doc.tokens if tok in kept)


def explain(
    predict_p1: Callable[[str], float],
    doc: TokenDoc,
    n: int = 1000,
    top_k: int = 10,
    sigma: float = DEFAULT_SIGMA,
    ridge_lambda: float = 1.0,
    seed: int = 0,
) -> Explanation:
    """Fit the weighted ridge surrogate and keep the top_k tokens.

    predict_p1 receives masked text rebuilt from the kept tokens, so the
    model must accept any legal (possibly empty) input string.
    """
    types = unique_tokens(doc)
    if not types:
        raise EmptyDoc("document has no tokens to explain")
    samples = sample_perturbations(doc, n, seed, sigma)
    for s in samples:
        s.p1 = float(predict_p1(masked_text(doc, s.mask, types)))
    model_p1 = samples[0].p1

    y = np.array([s.p1 for s in samples])
    Z = np.array([s.mask for s in samples], dtype=float)
    w = np.array([s.proximity for s in samples])

    if float(y.max() - y.min()) < 1e-12:
        return Explanation(
            items=[(t, 0.0) for t in types[:top_k]],
            intercept=float(y[0]),
            model_p1=model_p1,
            local_r2=1.0,
            degenerate=True,
        )

    sw = w.sum()
    z_mean = (w[:, None] * Z).sum(axis=0) / sw
    y_mean = float((w * y).sum() / sw)
    Zc = Z - z_mean
    yc = y - y_mean
    m = Z.shape[1]
    gram = Zc.T @ (w[:, None] * Zc) + ridge_lambda * np.eye(m)
    beta = np.linalg.solve(gram, Zc.T @ (w * yc))
    intercept = y_mean - float(z_mean @ beta)

    pred = Z @ beta + intercept
    ss_res = float((w * (y - pred) ** 2).sum())
    ss_tot = float((w * (y - y_mean) ** 2).sum())
    local_r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    order = sorted(range(m), key=lambda i: (-abs(beta[i]), i))[:top_k]
    items = [(types[i], float(beta[i])) for i in order]
    return Explanation(
        items=items,
        intercept=intercept,
        model_p1=model_p1,
        local_r2=local_r2,
    )
