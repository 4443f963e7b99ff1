"""Ensemble predictability scoring.

Each ensemble member draws its own train partition with a generator derived
from ``(seed, member_index)`` via ``numpy.random.default_rng([seed, i])``, so
results do not depend on member scheduling order.  Within a member, both
probes (logistic regression first, then SVM) train on the same partition and
are evaluated on the complement: every held-out sample gains one evaluation
per model, plus one correct count per model that classified it right.  A
member whose draw contains a single class is skipped and logged rather than
failing the pass.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import SingleClassInput, TrainTooLarge, UnknownId
from .linmodels import TrainConfig, predict, train_logreg, train_svm

log = logging.getLogger(__name__)

MODELS_PER_MEMBER = 2  # logreg + svm


@dataclass
class EnsembleConfig:
    m: int  # ensemble members
    t: int  # train partition size per member
    seed: int = 0
    probe: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.t < 1:
            raise ValueError("t must be >= 1")


@dataclass
class PredictabilityLedger:
    """Per-sample evaluation count E and correct count C."""

    evals: dict[str, int]
    correct: dict[str, int]
    skipped_members: list[int] = field(default_factory=list)

    @classmethod
    def fresh(cls, ids: Iterable[str]) -> "PredictabilityLedger":
        ids = list(ids)
        return cls(evals={i: 0 for i in ids}, correct={i: 0 for i in ids})

    def add(self, sample_id: str, correct: bool) -> None:
        self.evals[sample_id] += 1
        if correct:
            self.correct[sample_id] += 1

    def to_dict(self) -> dict:
        return {sid: {"E": self.evals[sid], "C": self.correct[sid]} for sid in self.evals}

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def member_rng(seed: int, member_index: int) -> np.random.Generator:
    """The per-member generator; the derivation rule is part of the protocol."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, member_index])


def run_ensemble(
    X: np.ndarray,
    labels: Sequence[str],
    ids: Sequence[str],
    cfg: EnsembleConfig,
    members: Optional[Iterable[int]] = None,
) -> PredictabilityLedger:
    """Accumulate E/C counts over ``cfg.m`` members (or an explicit member
    index subset, which must yield the same ledger in any order)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not (len(labels) == len(ids) == n):
        raise ValueError("X, labels and ids must align")
    if len(set(ids)) != n:
        raise ValueError("ids must be distinct")
    if cfg.t >= n:
        raise TrainTooLarge(f"t={cfg.t} must be < |S|={n}")
    if len(set(labels)) < 2:
        raise SingleClassInput("ensemble needs >= 2 labels present")

    labels = list(labels)
    ids = list(ids)
    label_order = sorted(set(labels))
    ledger = PredictabilityLedger.fresh(ids)
    total_holdout = 0

    for i in (range(cfg.m) if members is None else members):
        rng = member_rng(cfg.seed, i)
        train_idx = np.sort(rng.choice(n, size=cfg.t, replace=False))
        train_labels = [labels[j] for j in train_idx]
        if len(set(train_labels)) < 2:
            log.warning("member %d drew a single-class train set; skipped", i)
            ledger.skipped_members.append(i)
            continue
        mask = np.ones(n, dtype=bool)
        mask[train_idx] = False
        hold_idx = np.flatnonzero(mask)
        X_train = X[train_idx]
        X_hold = X[hold_idx]
        hold_labels = [labels[j] for j in hold_idx]
        hold_ids = [ids[j] for j in hold_idx]
        total_holdout += len(hold_idx)
        for train_fn in (train_logreg, train_svm):
            model = train_fn(X_train, train_labels, cfg.probe, label_order=label_order)
            preds = predict(model, X_hold)
            for sid, pred, truth in zip(hold_ids, preds, hold_labels):
                ledger.add(sid, pred == truth)

    got = sum(ledger.evals.values())
    want = MODELS_PER_MEMBER * total_holdout
    assert got == want, f"evaluation accounting broken: {got} != {want}"
    return ledger


def predictability(ledger: PredictabilityLedger, sample_id: str) -> Optional[float]:
    """C/E, or None when the sample was never evaluated."""
    if sample_id not in ledger.evals:
        raise UnknownId(sample_id)
    e = ledger.evals[sample_id]
    if e == 0:
        return None
    return ledger.correct[sample_id] / e
