import math

import numpy as np
import pytest

from illuminate.classify import TrainConfig, train_logreg
from illuminate.classify.pipeline import TextClassifier
from illuminate.explain import (
    EmptyDoc,
    explain,
    masked_text,
    sample_perturbations,
    unique_tokens,
)
from illuminate.textprep import TokenDoc, fit_tfidf, preprocess, tfidf_transform


class TestSamplePerturbations:
    def test_single_token_doc(self):
        doc = TokenDoc(["solo"], "solo")
        samples = sample_perturbations(doc, n=2, seed=0)
        masks = {tuple(s.mask) for s in samples}
        assert masks == {(1,), (0,)}

    def test_first_sample_is_full_doc(self):
        doc = TokenDoc(["a", "b", "c"], "")
        samples = sample_perturbations(doc, n=5, seed=1)
        assert samples[0].mask.tolist() == [1, 1, 1]
        assert samples[0].proximity == 1.0

    def test_hand_proximity(self):
        # keep 2 of 4 types: d = 1 - 2/sqrt(2*4); proximity = exp(-d^2/625)
        doc = TokenDoc(["a", "b", "c", "d"], "")
        samples = sample_perturbations(doc, n=300, seed=3)
        expected_d = 1 - 2 / math.sqrt(2 * 4)
        expected = math.exp(-(expected_d**2) / 625.0)
        for s in samples:
            if int(s.mask.sum()) == 2:
                assert s.proximity == pytest.approx(expected)
                break
        else:
            pytest.fail("no mask keeping exactly 2 tokens sampled")

    def test_deterministic(self):
        doc = TokenDoc(["a", "b", "c"], "")
        a = sample_perturbations(doc, n=50, seed=9)
        b = sample_perturbations(doc, n=50, seed=9)
        assert all(np.array_equal(x.mask, y.mask) for x, y in zip(a, b))

    def test_empty_doc(self):
        with pytest.raises(EmptyDoc):
            sample_perturbations(TokenDoc([], ""), n=5, seed=0)

    def test_unique_tokens_order(self):
        doc = TokenDoc(["b", "a", "b", "c", "a"], "")
        assert unique_tokens(doc) == ["b", "a", "c"]

    def test_masked_text_removes_all_occurrences(self):
        doc = TokenDoc(["b", "a", "b", "c"], "")
        types = unique_tokens(doc)
        text = masked_text(doc, np.array([0, 1, 1]), types)
        assert text == "a c"


class TestExplain:
    def test_constant_model(self):
        doc = TokenDoc(["x", "y", "z"], "")
        result = explain(lambda text: 0.42, doc, n=64, seed=0)
        assert result.degenerate
        assert result.intercept == pytest.approx(0.42)
        assert all(w == 0.0 for _, w in result.items)
        assert result.model_p1 == pytest.approx(0.42)

    def test_deterministic(self):
        doc = TokenDoc(["u", "v", "w"], "")
        fn = lambda text: 0.2 + 0.6 * ("u" in text.split())
        a = explain(fn, doc, n=200, seed=5)
        b = explain(fn, doc, n=200, seed=5)
        assert a.items == b.items
        assert a.local_r2 == b.local_r2

    def test_tokens_subset_of_doc(self):
        doc = TokenDoc(["p", "q", "r", "s"], "")
        fn = lambda text: min(1.0, 0.1 + 0.2 * len(text.split()))
        result = explain(fn, doc, n=300, seed=2)
        assert {t for t, _ in result.items} <= set(doc.tokens)
        assert result.local_r2 <= 1.0

    def test_top_k_limits_items(self):
        tokens = [f"t{i}" for i in range(15)]
        doc = TokenDoc(tokens, "")
        fn = lambda text: min(1.0, len(text.split()) / 15)
        result = explain(fn, doc, n=400, seed=1, top_k=10)
        assert len(result.items) == 10


def _fit_pipeline(corpus_posts):
    docs = [preprocess(p.text) for p in corpus_posts]
    vocab = fit_tfidf(docs, cap=300)
    X = [tfidf_transform(vocab, d) for d in docs]
    y = [p.label for p in corpus_posts]
    model = train_logreg(
        X, y, TrainConfig(epochs=120, learning_rate=0.2), C=100.0, n_features=vocab.size
    )
    return TextClassifier(model=model, vocab=vocab)


def _logit_contributions(pipe, text):
    doc = preprocess(text)
    vec = tfidf_transform(pipe.vocab, doc)
    inv = {i: t for t, i in pipe.vocab.index.items()}
    return {inv[i]: pipe.model.weights[i] * x for i, x in vec.items()}


class TestAgainstLogRegOracle:
    def test_top_token_matches_weight_oracle(self, synth_corpus):
        pipe = _fit_pipeline(synth_corpus.posts)
        hits = 0
        total = 50
        for post in synth_corpus.posts[:total]:
            doc = preprocess(post.text)
            result = explain(pipe.p1, doc, n=500, seed=11)
            contrib = _logit_contributions(pipe, post.text)
            oracle_top = max(contrib, key=lambda t: abs(contrib[t]))
            if result.items and result.items[0][0] == oracle_top:
                hits += 1
        assert hits / total >= 0.8

    def test_masking_top_positive_token_lowers_p1(self, synth_corpus):
        pipe = _fit_pipeline(synth_corpus.posts)
        lowered = 0
        total = 0
        for post in synth_corpus.posts[:30]:
            doc = preprocess(post.text)
            result = explain(pipe.p1, doc, n=500, seed=13)
            positives = [(t, w) for t, w in result.items if w > 0]
            if not positives:
                continue
            total += 1
            top = positives[0][0]
            masked = " ".join(tok for tok in doc.tokens if tok != top)
            if pipe.p1(masked) < pipe.p1(" ".join(doc.tokens)):
                lowered += 1
        assert total >= 20
        assert lowered / total >= 0.9

    def test_linear_model_weight_recovery(self):
        # purely linear model over binary presence features: LIME should
        # recover per-token contributions within 10% on the top 3
        tokens = ["aa", "bb", "cc", "dd", "ee", "ff"]
        coef = {"aa": 0.30, "bb": -0.22, "cc": 0.15, "dd": 0.05, "ee": -0.02, "ff": 0.01}

        def fn(text):
            present = set(text.split())
            return 0.4 + sum(c for t, c in coef.items() if t in present)

        doc = TokenDoc(tokens, " ".join(tokens))
        result = explain(fn, doc, n=5000, seed=21, ridge_lambda=1e-6)
        top3 = result.items[:3]
        assert [t for t, _ in top3] == ["aa", "bb", "cc"]
        for token, weight in top3:
            assert weight == pytest.approx(coef[token], rel=0.10)
