"""Text-in, prediction-out wrapper pairing a model with its featurizer."""
from __future__ import annotations

from dataclasses import dataclass

from ..textprep import EmbeddingTable, Vocabulary, embed_sequence, preprocess, tfidf_transform
from . import CnnModel, Prediction, predict
from .common import DimensionMismatch


@dataclass
class TextClassifier:
    """A trained model plus everything needed to score raw text.

    Sparse-feature models need `vocab`; the CNN needs `table`.
    """

    model: object
    vocab: Vocabulary | None = None
    table: EmbeddingTable | None = None
    stopwords: bool = True
    stemming: bool = True

    def __post_init__(self):
        if isinstance(self.model, CnnModel):
            if self.table is None:
                raise DimensionMismatch("CNN models need an embedding table")
        elif self.vocab is None:
            raise DimensionMismatch("sparse-feature models need a vocabulary")

    def features(self, text: str):
        doc = preprocess(text, stopwords=self.stopwords, stemming=self.stemming)
        if isinstance(self.model, CnnModel):
            return embed_sequence(doc, self.table, self.model.max_len)
        return tfidf_transform(self.vocab, doc)

    def predict_text(self, text: str) -> Prediction:
        return predict(self.model, self.features(text))

    def p1(self, text: str) -> float:
        return self.predict_text(text).p1
