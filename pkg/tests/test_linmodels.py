import numpy as np
import pytest

from dqkit.errors import DimMismatch, SingleClassInput
from dqkit.linmodels import (
    LinearModel,
    TrainConfig,
    _onehot,
    _with_bias,
    accuracy,
    logreg_gradient,
    logreg_loss,
    predict,
    svm_objective,
    svm_subgradient,
    train_logreg,
    train_svm,
)


def test_initial_loss_is_log_nclasses():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(9, 4))
    y = ["a", "b", "c"] * 3
    m = train_logreg(X, y, TrainConfig(epochs=1))
    assert m.loss_history[0] == pytest.approx(np.log(3), abs=1e-9)


def test_logreg_separable_blob(blob):
    X, y = blob
    m = train_logreg(X, y, TrainConfig(learning_rate=0.5, epochs=500, l2=0.0))
    assert accuracy(m, X, y) == 1.0


def test_logreg_deterministic(blob):
    X, y = blob
    cfg = TrainConfig(learning_rate=0.2, epochs=50, l2=1e-3, seed=9)
    w1 = train_logreg(X, y, cfg).weights
    w2 = train_logreg(X, y, cfg).weights
    assert w1.tobytes() == w2.tobytes()


def test_logreg_loss_non_increasing(blob):
    X, y = blob
    m = train_logreg(X, y, TrainConfig(learning_rate=0.1, epochs=100, l2=0.0))
    diffs = np.diff(m.loss_history)
    assert (diffs <= 1e-12).all()


def _finite_diff(loss_fn, W, h=1e-5):
    num = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            Wp, Wm = W.copy(), W.copy()
            Wp[i, j] += h
            Wm[i, j] -= h
            num[i, j] = (loss_fn(Wp) - loss_fn(Wm)) / (2 * h)
    return num


def test_logreg_gradient_matches_finite_differences():
    rng = np.random.default_rng(17)
    X = rng.normal(size=(5, 3))
    y = ["a", "b", "c", "a", "b"]
    Xb = _with_bias(X)
    Y = _onehot(y, ["a", "b", "c"])
    W = rng.normal(size=(3, 4))
    l2 = 0.01
    G = logreg_gradient(W, Xb, Y, l2)
    num = _finite_diff(lambda w: logreg_loss(w, Xb, Y, l2), W)
    rel = np.abs(G - num) / np.maximum(1e-8, np.abs(G) + np.abs(num))
    assert rel.max() < 1e-4


def test_svm_subgradient_away_from_kink():
    rng = np.random.default_rng(23)
    X = rng.normal(size=(6, 3))
    y = ["a", "b"] * 3
    Xb = _with_bias(X)
    ybin = 2.0 * _onehot(y, ["a", "b"]) - 1.0
    W = rng.normal(size=(2, 4))
    margins = ybin * (Xb @ W.T)
    assert np.abs(margins - 1.0).min() > 1e-3  # no point sits on the hinge kink
    G = svm_subgradient(W, Xb, ybin, l2=0.05)
    num = _finite_diff(lambda w: svm_objective(w, Xb, ybin, 0.05), W)
    rel = np.abs(G - num) / np.maximum(1e-8, np.abs(G) + np.abs(num))
    assert rel.max() < 1e-4


def test_svm_separable_blob(blob):
    X, y = blob
    m = train_svm(X, y, TrainConfig(learning_rate=0.1, epochs=200, l2=1e-4, seed=1))
    assert accuracy(m, X, y) == 1.0


def test_svm_single_class_rejected():
    X = np.ones((4, 2))
    with pytest.raises(SingleClassInput):
        train_svm(X, ["a"] * 4, TrainConfig())
    with pytest.raises(SingleClassInput):
        train_logreg(X, ["a"] * 4, TrainConfig())


def test_svm_feature_scaling_keeps_train_labels(blob):
    X, y = blob
    cfg = TrainConfig(learning_rate=0.1, epochs=200, l2=0.0, seed=1)
    m1 = train_svm(X, y, cfg)
    m10 = train_svm(X * 10, y, cfg)
    assert predict(m1, X) == predict(m10, X * 10)


def test_svm_deterministic(blob):
    X, y = blob
    cfg = TrainConfig(learning_rate=0.05, epochs=30, l2=1e-4, seed=4)
    assert train_svm(X, y, cfg).weights.tobytes() == train_svm(X, y, cfg).weights.tobytes()


def test_predict_zero_weights_tie_break():
    m = LinearModel("logreg", np.zeros((3, 4)), ["alpha", "beta", "gamma"])
    out = predict(m, np.ones((5, 3)))
    assert out == ["alpha"] * 5


def test_predict_known_weights():
    W = np.array([
        [1.0, 0.0, 0.0],   # class a scores x0
        [0.0, 1.0, 0.0],   # class b scores x1
    ])
    m = LinearModel("logreg", W, ["a", "b"])
    X = np.array([[2.0, 1.0], [1.0, 2.0], [0.0, 0.0]])
    assert predict(m, X) == ["a", "b", "a"]  # last is a tie -> first label


def test_predict_dim_mismatch(blob):
    X, y = blob
    m = train_logreg(X, y, TrainConfig(epochs=5))
    with pytest.raises(DimMismatch):
        predict(m, np.ones((2, 5)))


def test_train_predict_round_trip(blob):
    X, y = blob
    m = train_logreg(X, y, TrainConfig(learning_rate=0.5, epochs=500, l2=0.0))
    assert predict(m, X) == y


def test_weights_serialize_to_json(blob):
    import json

    X, y = blob
    m = train_svm(X, y, TrainConfig(epochs=5))
    data = json.loads(json.dumps(m.to_dict()))
    assert data["kind"] == "svm"
    assert np.asarray(data["weights"]).shape == m.weights.shape
    assert data["label_order"] == m.label_order
