"""Deterministic linear probes: multinomial logistic regression and a
one-vs-rest linear SVM.

Both probes carry the bias as the last weight column and regularize the full
weight matrix (bias included) with (l2/2)*||W||^2.  Logistic regression runs
full-batch gradient descent from zero initialization, so identical inputs
give bit-identical weights.  The SVM takes per-example subgradient steps over
a single seed-shuffled example order reused every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimMismatch, SingleClassInput


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


@dataclass
class LinearModel:
    kind: str  # "logreg" | "svm"
    weights: np.ndarray  # (L, d+1), bias last column
    label_order: list[str]
    loss_history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "weights": self.weights.tolist(),
                "label_order": list(self.label_order)}


def _check_inputs(X: np.ndarray, y: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimMismatch("X must be 2-D")
    if X.shape[0] != len(y):
        raise DimMismatch(f"{X.shape[0]} rows vs {len(y)} labels")
    labels = sorted(set(y))
    if len(labels) < 2:
        raise SingleClassInput(f"need >= 2 distinct labels, got {labels}")
    return X, labels


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _onehot(y: Sequence[str], label_order: list[str]) -> np.ndarray:
    index = {lab: i for i, lab in enumerate(label_order)}
    Y = np.zeros((len(y), len(label_order)))
    for i, lab in enumerate(y):
        Y[i, index[lab]] = 1.0
    return Y


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logreg_loss(W: np.ndarray, Xb: np.ndarray, Y: np.ndarray, l2: float) -> float:
    """Mean cross-entropy plus (l2/2)*||W||^2; Xb already carries the bias column."""
    P = _softmax(Xb @ W.T)
    ll = -np.log(np.clip((P * Y).sum(axis=1), 1e-300, None))
    return float(ll.mean() + 0.5 * l2 * np.sum(W * W))


def logreg_gradient(W: np.ndarray, Xb: np.ndarray, Y: np.ndarray, l2: float) -> np.ndarray:
    P = _softmax(Xb @ W.T)
    return (P - Y).T @ Xb / Xb.shape[0] + l2 * W


def train_logreg(X: np.ndarray, y: Sequence[str], cfg: TrainConfig,
                 label_order: list[str] | None = None) -> LinearModel:
    X, labels = _check_inputs(X, y)
    if label_order is not None:
        labels = list(label_order)
    Xb = _with_bias(X)
    Y = _onehot(y, labels)
    W = np.zeros((len(labels), Xb.shape[1]))
    history = []
    for _ in range(cfg.epochs):
        history.append(logreg_loss(W, Xb, Y, cfg.l2))
        W -= cfg.learning_rate * logreg_gradient(W, Xb, Y, cfg.l2)
    history.append(logreg_loss(W, Xb, Y, cfg.l2))
    return LinearModel("logreg", W, labels, loss_history=history)


def svm_objective(W: np.ndarray, Xb: np.ndarray, ybin: np.ndarray, l2: float) -> float:
    """Mean one-vs-rest hinge over (example, class) pairs plus (l2/2)*||W||^2.

    ``ybin`` is (n, L) holding +1/-1 class indicators.
    """
    margins = ybin * (Xb @ W.T)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(hinge.mean() + 0.5 * l2 * np.sum(W * W))


def svm_subgradient(W: np.ndarray, Xb: np.ndarray, ybin: np.ndarray, l2: float) -> np.ndarray:
    margins = ybin * (Xb @ W.T)
    active = (margins < 1.0).astype(np.float64)
    G = -(active * ybin).T @ Xb / (Xb.shape[0] * ybin.shape[1])
    return G + l2 * W


def train_svm(X: np.ndarray, y: Sequence[str], cfg: TrainConfig,
              label_order: list[str] | None = None) -> LinearModel:
    X, labels = _check_inputs(X, y)
    if label_order is not None:
        labels = list(label_order)
    Xb = _with_bias(X)
    ybin = 2.0 * _onehot(y, labels) - 1.0
    W = np.zeros((len(labels), Xb.shape[1]))
    rng = np.random.default_rng(int(cfg.seed) & 0xFFFFFFFFFFFFFFFF)
    order = rng.permutation(Xb.shape[0])
    lr = cfg.learning_rate
    for _ in range(cfg.epochs):
        for i in order:
            x = Xb[i]
            yb = ybin[i]
            active = (yb * (W @ x)) < 1.0
            W *= 1.0 - lr * cfg.l2
            if active.any():
                W[active] += lr * np.outer(yb[active], x)
    return LinearModel("svm", W, labels)


def predict(m: LinearModel, X: np.ndarray) -> list[str]:
    """Argmax over class scores; ties go to the earliest label_order entry."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.weights.shape[1] - 1:
        raise DimMismatch(f"expected {m.weights.shape[1] - 1} features, got {X.shape}")
    scores = _with_bias(X) @ m.weights.T
    best = scores.argmax(axis=1)  # argmax takes the first maximum: the tie-break rule
    return [m.label_order[i] for i in best]


def accuracy(m: LinearModel, X: np.ndarray, y: Sequence[str]) -> float:
    preds = predict(m, X)
    return sum(p == t for p, t in zip(preds, y)) / len(y)
