import numpy as np
import pytest

from illuminate.classify import (
    DimensionMismatch,
    LogRegModel,
    Prediction,
    SingleClass,
    TrainConfig,
    logreg_gradient,
    logreg_objective,
    predict,
    train_logreg,
)


def test_separable_one_hot_docs():
    X = np.array([[1.0, 0.0], [0.0, 1.0]] * 8)
    y = np.array([1, 0] * 8)
    model = train_logreg(X, y, TrainConfig(epochs=200, learning_rate=0.1), C=10.0)
    preds = [predict(model, row).label for row in X]
    assert preds == y.tolist()


def test_all_zero_features_predict_sigmoid_bias():
    X = np.zeros((6, 4))
    y = np.array([1, 0, 1, 0, 1, 0])
    model = train_logreg(X, y, TrainConfig(epochs=10), C=1.0)
    probs = {predict(model, row).p1 for row in X}
    assert len(probs) == 1


def test_single_class_rejected():
    X = np.ones((4, 2))
    with pytest.raises(SingleClass):
        train_logreg(X, [1, 1, 1, 1], TrainConfig())


def test_length_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        train_logreg(np.ones((4, 2)), [1, 0, 1], TrainConfig())


def test_sparse_rows_accepted():
    X = [{0: 1.0}, {1: 1.0}, {0: 0.9}, {1: 0.8}]
    model = train_logreg(X, [1, 0, 1, 0], TrainConfig(epochs=120, learning_rate=0.1), C=10.0, n_features=3)
    assert model.weights.shape == (3,)
    assert predict(model, {0: 1.0}).label == 1
    assert predict(model, {1: 1.0}).label == 0


def test_zero_model_predicts_half():
    model = LogRegModel(weights=np.zeros(3), bias=0.0, C=1.0)
    pred = predict(model, np.array([0.3, -2.0, 5.0]))
    assert pred.p1 == pytest.approx(0.5)
    assert pred.label == 1  # p1 >= 0.5 labels class 1 for the logistic link
    assert pred == Prediction(p1=0.5, label=1)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 7))
    y = rng.integers(0, 2, size=12).astype(float)
    if len(set(y.tolist())) < 2:
        y[0] = 1.0 - y[0]
    w = rng.normal(scale=0.5, size=7)
    b = float(rng.normal())
    C = 2.0
    grad_w, grad_b = logreg_gradient(w, b, X, y, C)
    eps = 1e-6
    for i in range(7):
        bump = np.zeros(7)
        bump[i] = eps
        num = (
            logreg_objective(w + bump, b, X, y, C)
            - logreg_objective(w - bump, b, X, y, C)
        ) / (2 * eps)
        denom = max(abs(num), abs(grad_w[i]), 1e-12)
        assert abs(num - grad_w[i]) / denom < 1e-3
    num_b = (
        logreg_objective(w, b + eps, X, y, C) - logreg_objective(w, b - eps, X, y, C)
    ) / (2 * eps)
    assert abs(num_b - grad_b) / max(abs(num_b), abs(grad_b), 1e-12) < 1e-3


def test_full_batch_line_search_descends():
    # halving the step until the objective decreases must never increase it
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 5))
    w_true = np.array([2.0, -1.0, 0.5, 0.0, 1.0])
    y = (X @ w_true > 0).astype(float)
    w = np.zeros(5)
    b = 0.0
    C = 1.0
    values = [logreg_objective(w, b, X, y, C)]
    for _ in range(25):
        gw, gb = logreg_gradient(w, b, X, y, C)
        lr = 1.0
        while True:
            w_new, b_new = w - lr * gw, b - lr * gb
            candidate = logreg_objective(w_new, b_new, X, y, C)
            if candidate <= values[-1] or lr < 1e-8:
                break
            lr /= 2
        w, b = w_new, b_new
        values.append(candidate)
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


def test_seed_reproducibility():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 6))
    y = rng.integers(0, 2, size=40)
    y[0], y[1] = 0, 1
    cfg = TrainConfig(seed=9, epochs=15, batch_size=8)
    a = train_logreg(X, y, cfg)
    b = train_logreg(X, y, cfg)
    assert np.array_equal(a.weights, b.weights)
    assert a.bias == b.bias


def test_full_batch_invariant_to_sample_order():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(16, 4))
    y = rng.integers(0, 2, size=16)
    y[0], y[1] = 0, 1
    cfg = TrainConfig(seed=2, epochs=10, batch_size=16)
    base = train_logreg(X, y, cfg)
    perm = rng.permutation(16)
    shuffled = train_logreg(X[perm], y[perm], cfg)
    x_probe = rng.normal(size=4)
    assert predict(base, x_probe).p1 == pytest.approx(
        predict(shuffled, x_probe).p1, abs=1e-9
    )


def test_synthetic_corpus_f1(synth_corpus):
    from illuminate.corpus import SplitSpec, stratified_split
    from illuminate.metrics import prf_report
    from illuminate.textprep import fit_tfidf, preprocess, tfidf_transform

    ds = stratified_split(synth_corpus, SplitSpec(seed=1))
    train = ds.partition("train")
    test = ds.partition("test")
    docs = [preprocess(p.text) for p in train]
    vocab = fit_tfidf(docs, cap=300)
    X = [tfidf_transform(vocab, d) for d in docs]
    model = train_logreg(
        X,
        [p.label for p in train],
        TrainConfig(epochs=80, learning_rate=0.1),
        C=10.0,
        n_features=vocab.size,
    )
    preds = [
        predict(model, tfidf_transform(vocab, preprocess(p.text))).label for p in test
    ]
    report = prf_report(preds, [p.label for p in test])
    assert report.f1 >= 0.95
