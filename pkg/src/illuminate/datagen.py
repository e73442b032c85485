"""Synthetic two-class corpus generator used by tests, demos, and benches.

Documents mix class-specific keywords (disjoint pools) with shared noise
words, so the generating label is a ground-truth oracle for classifier
and pseudo-labeling checks.
"""
from __future__ import annotations

import numpy as np

from .corpus import Dataset, Post
from .textprep import EmbeddingTable

# pools survive the cleaning pipeline unchanged (checked in tests)
CLASS1_POOL = (
    "gloom", "numb", "drain", "ach", "fog", "burden",
    "empti", "dull", "worn", "heavi", "sink", "shut",
)
CLASS0_POOL = (
    "cheer", "spark", "fresh", "climb", "warm", "bloom",
    "brisk", "glow", "steadi", "keen", "lift", "crisp",
)
NOISE_POOL = (
    "window", "toast", "street", "garden", "letter", "train",
    "dinner", "market", "river", "shelf", "candl", "pencil",
    "meadow", "bottl", "corner", "basket", "bridg", "lantern",
)


def make_two_class_corpus(
    n: int = 200,
    seed: int = 0,
    min_len: int = 24,
    max_len: int = 40,
    keyword_count: tuple[int, int] = (6, 10),
) -> Dataset:
    """Balanced labeled posts; label 1 draws from CLASS1_POOL, 0 from CLASS0_POOL."""
    rng = np.random.default_rng(seed)
    posts = []
    for i in range(n):
        label = i % 2
        pool = CLASS1_POOL if label == 1 else CLASS0_POOL
        length = int(rng.integers(min_len, max_len + 1))
        k = int(rng.integers(keyword_count[0], keyword_count[1] + 1))
        words = [pool[int(j)] for j in rng.integers(0, len(pool), size=k)]
        words += [
            NOISE_POOL[int(j)] for j in rng.integers(0, len(NOISE_POOL), size=length - k)
        ]
        order = rng.permutation(len(words))
        text = " ".join(words[j] for j in order)
        posts.append(Post(id=f"syn-{i:04d}", text=text, label=label, source="synthetic"))
    return Dataset(posts=posts)


def make_fixture_embeddings(dim: int = 8, seed: int = 0, scale: float = 0.05) -> EmbeddingTable:
    """Embedding table separating the two keyword pools along dims 0..3.

    Class-1 keywords point positive, class-0 negative, noise words get
    small random vectors, so a CNN over these features can recover the
    generating label.
    """
    rng = np.random.default_rng(seed)
    vectors: dict[str, np.ndarray] = {}
    signal = np.zeros(dim)
    signal[: min(4, dim)] = 1.0
    for token in CLASS1_POOL:
        vectors[token] = signal + scale * rng.normal(size=dim)
    for token in CLASS0_POOL:
        vectors[token] = -signal + scale * rng.normal(size=dim)
    for token in NOISE_POOL:
        vectors[token] = scale * rng.normal(size=dim)
    return EmbeddingTable(dim=dim, vectors=vectors)
