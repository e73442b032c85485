"""Text normalization, TF-IDF vectorization, and static word embeddings.

The cleaning pipeline is fixed: lowercase, strip ASCII punctuation, drop
non-ASCII bytes, collapse whitespace, split, optional stop-word filter,
optional Porter stem.  Running the pipeline on its own output is a no-op.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IlluminateError
from .porter import InvalidToken, porter_stem

__all__ = [
    "TokenDoc",
    "Vocabulary",
    "EmbeddingTable",
    "preprocess",
    "porter_stem",
    "InvalidToken",
    "load_stopwords",
    "fit_tfidf",
    "tfidf_transform",
    "tfidf_matrix",
    "load_embeddings",
    "save_embeddings",
    "embed_sequence",
    "EmptyCorpus",
    "HeaderMismatch",
    "RowLengthMismatch",
]

# token -> weight; L2 norm is 1.0 unless the map is empty
TfidfVector = dict[int, float]


class EmptyCorpus(IlluminateError):
    pass


class HeaderMismatch(IlluminateError):
    pass


class RowLengthMismatch(IlluminateError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class TokenDoc:
    """Cleaned token stream plus the string it came from."""

    tokens: list[str]
    original: str


@dataclass
class Vocabulary:
    """Token index fitted on a corpus, with document frequencies."""

    index: dict[str, int]
    df: dict[str, int]
    total_docs: int
    cap: int

    @property
    def size(self) -> int:
        return len(self.index)

    def idf(self, token: str) -> float:
        return math.log((1 + self.total_docs) / (1 + self.df[token])) + 1.0


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stop-word set; defaults to the frozen list bundled with the package."""
    if path is None:
        text = (
            resources.files("illuminate").joinpath("data/stopwords.txt").read_text()
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


_DEFAULT_STOPWORDS = None


def _default_stopwords() -> frozenset[str]:
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = load_stopwords()
    return _DEFAULT_STOPWORDS


def _clean_char(ch: str) -> str:
    if ch.isspace():
        return " "
    o = ord(ch)
    if o >= 128:
        return ""
    if "a" <= ch <= "z" or "0" <= ch <= "9":
        return ch
    return ""


def preprocess(
    text: str,
    *,
    stopwords: bool = True,
    stemming: bool = True,
    stopword_set: frozenset[str] | None = None,
) -> TokenDoc:
    """Run the full cleaning pipeline over raw text.

    Whitespace characters survive the punctuation strip so token
    boundaries are preserved; everything else outside [a-z0-9] goes.
    """
    lowered = text.lower()
    cleaned = "".join(_clean_char(ch) for ch in lowered)
    tokens = cleaned.split()
    if stopwords:
        stops = stopword_set if stopword_set is not None else _default_stopwords()
        tokens = [t for t in tokens if t not in stops]
    if stemming:
        tokens = [porter_stem(t) if t.isalpha() else t for t in tokens]
    return TokenDoc(tokens=tokens, original=text)


def fit_tfidf(docs: Sequence[TokenDoc], cap: int) -> Vocabulary:
    """Fit a vocabulary of at most `cap` tokens by document frequency.

    Ties in document frequency break lexicographically; indices are
    assigned in sorted token order.
    """
    if not docs:
        raise EmptyCorpus("cannot fit a vocabulary on zero documents")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    kept = sorted(df, key=lambda t: (-df[t], t))[:cap]
    index = {tok: i for i, tok in enumerate(sorted(kept))}
    return Vocabulary(
        index=index,
        df={tok: df[tok] for tok in index},
        total_docs=len(docs),
        cap=cap,
    )


def tfidf_transform(vocab: Vocabulary, doc: TokenDoc) -> TfidfVector:
    """Smoothed tf-idf weights for one document, L2-normalized.

    Out-of-vocabulary tokens are ignored; a fully out-of-vocabulary
    document yields the empty (zero) vector.
    """
    counts = Counter(t for t in doc.tokens if t in vocab.index)
    if not counts:
        return {}
    vec = {vocab.index[t]: c * vocab.idf(t) for t, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in vec.values()))
    return {i: w / norm for i, w in vec.items()}


def tfidf_matrix(vocab: Vocabulary, docs: Iterable[TokenDoc]) -> np.ndarray:
    """Dense (n_docs, vocab.size) matrix of tf-idf rows."""
    rows = []
    for doc in docs:
        row = np.zeros(vocab.size)
        for i, w in tfidf_transform(vocab, doc).items():
            row[i] = w
        rows.append(row)
    return np.asarray(rows) if rows else np.zeros((0, vocab.size))


@dataclass
class EmbeddingTable:
    """Static token -> dense vector lookup; all vectors share `dim`."""

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load a text-format embedding table.

    Format: a header line "<count> <dim>" then one line per token,
    "<token> v1 ... v_dim".
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise HeaderMismatch("empty embedding file")
    header = lines[0].split()
    if len(header) != 2:
        raise HeaderMismatch(f"bad header line: {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise HeaderMismatch(f"bad header line: {lines[0]!r}") from exc
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != count:
        raise HeaderMismatch(f"header declares {count} rows, file has {len(rows)}")
    vectors: dict[str, np.ndarray] = {}
    for offset, line in enumerate(rows, start=2):
        parts = line.split()
        if len(parts) != dim + 1:
            raise RowLengthMismatch(offset, f"expected {dim} values, got {len(parts) - 1}")
        try:
            vec = np.array([float(v) for v in parts[1:]])
        except ValueError:
            raise RowLengthMismatch(offset, "non-numeric value in row") from None
        vectors[parts[0]] = vec
    return EmbeddingTable(dim=dim, vectors=vectors)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write a table in the same text format load_embeddings reads."""
    lines = [f"{len(table.vectors)} {table.dim}"]
    for token, vec in table.vectors.items():
        lines.append(token + " " + " ".join(repr(float(v)) for v in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def embed_sequence(doc: TokenDoc, table: EmbeddingTable, max_len: int) -> np.ndarray:
    """Map the first `max_len` tokens to their vectors, zero-padded.

    Unknown tokens map to the zero vector, so the output shape is always
    (max_len, table.dim).
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out = np.zeros((max_len, table.dim))
    for i, token in enumerate(doc.tokens[:max_len]):
        vec = table.get(token)
        if vec is not None:
            out[i] = vec
    return out
