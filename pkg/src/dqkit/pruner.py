"""End-to-end pruning: coarse subset growth, ensemble predictability passes,
and quality-sorted deletion.

Every random draw comes from a generator derived with
``numpy.random.SeedSequence`` from the run seed plus a fixed stream tag, so a
replay with the same config reproduces the run exactly:

* coarse subsets:  ``default_rng([seed, COARSE_TAG])``
* iteration ``i`` ensemble seed: ``derive_seed(seed, ITER_TAG, i)``; members
  inside the pass then derive from that seed as documented in ``aflite``.

The coarse loop grows a candidate size by ``b`` per step (``b`` defaults to
the full dataset size, making the default coarse action lossless), draws a
fresh uniform subset each step, trains both probes on half of it and stops at
the first step whose accuracy fails to beat the previous step by more than
``epsilon``, returning the last improving subset.  Units for ``b`` are sample
counts by default; set ``coarse_units="percent"`` to grow by percentage of
the dataset instead.

The outer loop repeats: score predictability over the surviving set,
shortlist samples with P > tau, rank the shortlist by composite quality
impact ascending, and delete the ``min(k, |shortlist|)`` lowest.  It stops
when the target size is reached, the shortlist is empty, or the shortlist is
smaller than ``k`` (recorded in the trace as the stop reason).  Burned ids
are removed before anything else and can never reappear.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .aflite import EnsembleConfig, predictability, run_ensemble
from .corpus import Dataset
from .dqi import DqiConfig, DqiEngine, composite_dqi
from .embeddings import EmbeddingMatrix, EmbManifest
from .errors import (
    CoarseDisabled,
    DatasetTooSmall,
    EmbeddingCoverageGap,
    SingleClassInput,
    TargetTooLarge,
)
from .linmodels import TrainConfig, accuracy, train_logreg, train_svm

log = logging.getLogger(__name__)

COARSE_TAG = 101
ITER_TAG = 211


def derive_seed(seed: int, *tags: int) -> int:
    """Stable child seed from a parent seed and integer stream tags."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, tags)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class PruneConfig:
    n: int  # target size
    b: Optional[int] = None  # coarse growth step; None means |dataset|
    epsilon: float = 0.002
    m: int = 8
    t: float = 0.1  # train partition fraction of the current set
    tau: float = 0.75
    k: int = 500
    seed: int = 0
    dqi: DqiConfig = field(default_factory=DqiConfig)
    probe: TrainConfig = field(default_factory=TrainConfig)
    coarse_enabled: bool = True
    coarse_units: str = "samples"  # samples | percent

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.b is not None and self.b <= 0:
            raise ValueError("b must be > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not (0.0 < self.t < 1.0):
            raise ValueError("t must lie in (0, 1)")
        if not (0.0 < self.tau <= 1.0):
            raise ValueError("tau must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.coarse_units not in ("samples", "percent"):
            raise ValueError("coarse_units must be 'samples' or 'percent'")

    @classmethod
    def from_dict(cls, d: dict) -> "PruneConfig":
        d = dict(d)
        if "dqi" in d and isinstance(d["dqi"], dict):
            d["dqi"] = DqiConfig.from_dict(d["dqi"])
        if "probe" in d and isinstance(d["probe"], dict):
            d["probe"] = TrainConfig(**d["probe"])
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "PruneConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class IterationTrace:
    index: int
    size_before: int
    shortlist_size: int
    shortlist_ids: list[str]
    deleted_ids: list[str]
    p_min: float
    p_max: float
    dqi_cutoff: Optional[float]

    def to_dict(self) -> dict:
        return {
            "record": "iteration",
            "index": self.index,
            "size_before": self.size_before,
            "shortlist_size": self.shortlist_size,
            "shortlist_ids": self.shortlist_ids,
            "deleted_ids": self.deleted_ids,
            "p_min": self.p_min,
            "p_max": self.p_max,
            "dqi_cutoff": self.dqi_cutoff,
        }


@dataclass
class PruneTrace:
    coarse_steps: Optional[list[tuple[int, float]]] = None
    coarse_selected: Optional[int] = None
    iterations: list[IterationTrace] = field(default_factory=list)
    stop_reason: str = ""

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            coarse = {
                "record": "coarse",
                "steps": [[int(s), float(a)] for s, a in (self.coarse_steps or [])],
                "selected": self.coarse_selected,
                "stop_reason": self.stop_reason,
            }
            fh.write(json.dumps(coarse) + "\n")
            for it in self.iterations:
                fh.write(json.dumps(it.to_dict()) + "\n")


@dataclass
class PruneResult:
    kept: Dataset
    trace: PruneTrace


AccuracyFn = Callable[[np.ndarray, list[str], np.ndarray, list[str]], float]


def _probe_pair_accuracy(X_train, y_train, X_eval, y_eval, probe: TrainConfig) -> float:
    """Mean held-out accuracy of the two probes; degenerate draws score 0."""
    if len(y_eval) == 0 or len(set(y_train)) < 2:
        return 0.0
    accs = []
    for train_fn in (train_logreg, train_svm):
        model = train_fn(X_train, y_train, probe)
        accs.append(accuracy(model, X_eval, y_eval))
    return float(sum(accs) / len(accs))


def _coarse_with_trace(
    d: Dataset,
    features: np.ndarray,
    cfg: PruneConfig,
    accuracy_fn: Optional[AccuracyFn] = None,
) -> tuple[Dataset, list[tuple[int, float]]]:
    if not cfg.coarse_enabled:
        raise CoarseDisabled("coarse selection is disabled in this config")
    n = len(d)
    if n < 2:
        raise DatasetTooSmall("coarse selection needs >= 2 samples")
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != n:
        raise EmbeddingCoverageGap("features must align with the dataset")
    if accuracy_fn is None:
        accuracy_fn = lambda Xt, yt, Xe, ye: _probe_pair_accuracy(Xt, yt, Xe, ye, cfg.probe)

    rng = np.random.default_rng([int(cfg.seed) & 0xFFFFFFFFFFFFFFFF, COARSE_TAG])
    if cfg.coarse_units == "percent":
        step_sizes_of = lambda a: min(n, max(1, int(math.floor(a / 100.0 * n))))
        growth_cap = 100
    else:
        step_sizes_of = lambda a: min(n, a)
        growth_cap = n
    b = cfg.b if cfg.b is not None else growth_cap

    steps: list[tuple[int, float]] = []
    labels = d.labels()
    a = b
    prev_subset: Optional[list[int]] = None
    prev_acc: Optional[float] = None
    while True:
        size = step_sizes_of(a)
        idx = np.sort(rng.choice(n, size=size, replace=False))
        acc = 0.0
        if size >= 2:
            perm = rng.permutation(size)
            half = size // 2
            tr = idx[perm[:half]]
            ev = idx[perm[half:]]
            acc = accuracy_fn(features[tr], [labels[i] for i in tr],
                              features[ev], [labels[i] for i in ev])
        steps.append((int(size), float(acc)))
        improving = prev_acc is None or acc > prev_acc + cfg.epsilon
        if not improving:
            chosen = prev_subset
            break
        prev_subset, prev_acc = idx.tolist(), acc
        if size >= n:
            chosen = prev_subset
            break
        a += b
    keep = {d.samples[i].id for i in (chosen or [])}
    return d.subset(keep), steps


def coarse_select(
    d: Dataset,
    features: np.ndarray,
    cfg: PruneConfig,
    accuracy_fn: Optional[AccuracyFn] = None,
) -> Dataset:
    """Grow-and-test coarse subset selection; see the module docstring."""
    subset, _ = _coarse_with_trace(d, features, cfg, accuracy_fn)
    return subset


def prune(
    d: Dataset,
    emb: EmbeddingMatrix,
    manifest: EmbManifest,
    cfg: PruneConfig,
    accuracy_fn: Optional[AccuracyFn] = None,
) -> PruneResult:
    """Run the full selection pipeline and return survivors plus the audit trace."""
    burned = set(manifest.burned)
    working = d.without(burned)
    missing = [sid for sid in working.ids() if sid not in emb]
    if missing:
        raise EmbeddingCoverageGap(
            f"{len(missing)} samples lack embedding rows, e.g. {missing[:3]}")
    if cfg.n >= len(working):
        raise TargetTooLarge(
            f"target n={cfg.n} must be < {len(working)} usable samples")

    trace = PruneTrace()
    if cfg.coarse_enabled:
        feats = emb.take(working.ids()).rows.astype(np.float64)
        working, steps = _coarse_with_trace(working, feats, cfg, accuracy_fn)
        trace.coarse_steps = steps
        trace.coarse_selected = len(working)

    iteration = 0
    while len(working) > cfg.n:
        ids = working.ids()
        labels = working.labels()
        X = emb.take(ids).rows.astype(np.float64)
        size_before = len(working)
        t_abs = min(max(1, int(math.floor(cfg.t * size_before))), size_before - 1)
        ens_cfg = EnsembleConfig(m=cfg.m, t=t_abs,
                                 seed=derive_seed(cfg.seed, ITER_TAG, iteration),
                                 probe=cfg.probe)
        try:
            ledger = run_ensemble(X, labels, ids, ens_cfg)
        except SingleClassInput:
            trace.stop_reason = "single_class_remaining"
            break
        pmap = {sid: predictability(ledger, sid) for sid in ids}
        shortlist = [sid for sid in ids if pmap[sid] is not None and pmap[sid] > cfg.tau]
        if not shortlist:
            trace.stop_reason = "empty_shortlist"
            break

        sub_emb = emb.take(ids)
        engine = DqiEngine(working, sub_emb, cfg.dqi)
        impacts = engine.impacts(shortlist, components=cfg.dqi.sort_components)
        ranked = sorted(shortlist, key=lambda sid: (composite_dqi(impacts[sid], cfg.dqi), sid))
        deleted = ranked[: min(cfg.k, len(ranked))]
        cutoff = composite_dqi(impacts[deleted[-1]], cfg.dqi) if deleted else None

        trace.iterations.append(IterationTrace(
            index=iteration,
            size_before=size_before,
            shortlist_size=len(shortlist),
            shortlist_ids=list(shortlist),
            deleted_ids=list(deleted),
            p_min=min(pmap[sid] for sid in shortlist),
            p_max=max(pmap[sid] for sid in shortlist),
            dqi_cutoff=cutoff,
        ))
        working = working.without(deleted)
        iteration += 1
        if len(working) <= cfg.n:
            trace.stop_reason = "target_reached"
            break
        if len(shortlist) < cfg.k:
            trace.stop_reason = "shortlist_below_k"
            break
    else:
        trace.stop_reason = trace.stop_reason or "target_reached"

    if not trace.stop_reason:
        trace.stop_reason = "target_reached"
    return PruneResult(kept=working, trace=trace)
