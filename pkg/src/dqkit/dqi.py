"""Data-quality components, per-sample leave-one-out impact, and the
creator-facing traffic-light report.

The seven dataset-level components, each scaled to [0, 1] (higher is better):

* c1  harmonic mean of type/token ratio and normalized sentence-length
      dispersion (cv / (1 + cv)).  This realization is a documented stand-in;
      see README.
* c2  mean normalized Shannon entropy of the corpus frequency distribution at
      n-gram (1..ngram_max), coarse-POS and whole-sentence granularities.
      A granularity whose support has at most one distinct feature counts 1.
* c3  mean over samples of (1 - max Jaccard overlap with any other sample).
* c4  1 - NMI(binned within-sample field overlap; label).  Absent for
      single-field schemas.
* c5  1 - NMI(binned max cosine to any other sample; label), using embedding
      rows when a covering matrix is supplied, else bag-of-words vectors.
* c6  mean over samples of 1 / (1 + max(0, mean PMI of the sample's tokens
      with its own label)).
* c7  mean over eval-split samples of (1 - max Jaccard to any train-split
      sample).  Absent when split tags are missing.

NMI is mutual information divided by the smaller marginal entropy, with 0
substituted when that entropy is 0.  Binning is equal-width on [0, 1]
(values below 0 clamp into the first bin).

Per-sample impact q_c(s) = term_c(D) - term_c(D without s): negative impact
means removing the sample would improve the component.  ``DqiEngine``
computes impacts through exact incremental updates of the dataset-level
sufficient statistics; tests verify them against full recomputation.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Dataset, Sample, validate_sample
from .embeddings import EmbeddingMatrix
from .errors import (
    DatasetTooSmall,
    EmptyState,
    MissingEmbeddings,
    NoDefinedComponents,
    SchemaMismatch,
    UnknownId,
)
from .textstats import tag_coarse, tokenize

COMPONENTS = ("c1", "c2", "c3", "c4", "c5", "c6", "c7")


@dataclass
class DqiConfig:
    weights: dict[str, float] = field(default_factory=lambda: {c: 1.0 for c in COMPONENTS})
    sort_components: tuple[str, ...] = ("c1",)
    ngram_max: int = 3
    pmi_alpha: float = 1.0
    mi_bins: int = 10
    red_below: float = 0.25
    green_at_or_above: float = 0.60
    standalone_scores: bool = False
    c5_mode: str = "auto"  # auto | embedding | bow

    def __post_init__(self):
        self.sort_components = tuple(self.sort_components)
        unknown = [c for c in self.sort_components if c not in COMPONENTS]
        if unknown:
            raise ValueError(f"unknown components {unknown}")
        if not self.sort_components:
            raise ValueError("sort_components must be non-empty")
        if all(self.weights.get(c, 0.0) == 0.0 for c in COMPONENTS):
            raise ValueError("weights must not all be zero")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be >= 0")
        if not (0.0 <= self.red_below < self.green_at_or_above <= 1.0):
            raise ValueError("need 0 <= red_below < green_at_or_above <= 1")
        if self.mi_bins < 2:
            raise ValueError("mi_bins must be >= 2")
        if self.ngram_max < 1:
            raise ValueError("ngram_max must be >= 1")
        if self.c5_mode not in ("auto", "embedding", "bow"):
            raise ValueError(f"bad c5_mode {self.c5_mode!r}")

    def to_dict(self) -> dict:
        return {
            "weights": dict(self.weights),
            "sort_components": list(self.sort_components),
            "ngram_max": self.ngram_max,
            "pmi_alpha": self.pmi_alpha,
            "mi_bins": self.mi_bins,
            "thresholds": {
                "red_below": self.red_below,
                "green_at_or_above": self.green_at_or_above,
            },
            "standalone_scores": self.standalone_scores,
            "c5_mode": self.c5_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DqiConfig":
        thresholds = d.get("thresholds", {})
        kwargs = dict(
            weights=d.get("weights", {c: 1.0 for c in COMPONENTS}),
            sort_components=tuple(d.get("sort_components", ("c1",))),
            ngram_max=d.get("ngram_max", 3),
            pmi_alpha=d.get("pmi_alpha", 1.0),
            mi_bins=d.get("mi_bins", 10),
            red_below=thresholds.get("red_below", 0.25),
            green_at_or_above=thresholds.get("green_at_or_above", 0.60),
            standalone_scores=d.get("standalone_scores", False),
            c5_mode=d.get("c5_mode", "auto"),
        )
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "DqiConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def bundled_default(cls) -> "DqiConfig":
        text = resources.files("dqkit").joinpath("data/default-dqi.json").read_text("utf-8")
        return cls.from_dict(json.loads(text))


@dataclass
class ComponentValues:
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    c4: Optional[float] = None
    c5: Optional[float] = None
    c6: Optional[float] = None
    c7: Optional[float] = None

    def get(self, name: str) -> Optional[float]:
        return getattr(self, name)

    def defined(self) -> list[str]:
        return [c for c in COMPONENTS if getattr(self, c) is not None]

    def as_dict(self) -> dict[str, Optional[float]]:
        return {c: getattr(self, c) for c in COMPONENTS}


class DqiVector(ComponentValues):
    """Dataset-level component scores; absent components stay None."""


class ImpactVector(ComponentValues):
    """Leave-one-out deltas; negative means removal improves the component."""


@dataclass
class ComponentReport:
    score: float
    percentile: float
    color: str
    feedback: str
    recommendations: list[dict]


@dataclass
class DqiReport:
    components: dict[str, ComponentReport]
    composite: float
    dataset_size_at_eval: int

    def to_dict(self) -> dict:
        return {
            "components": {
                name: {
                    "score": rep.score,
                    "percentile": rep.percentile,
                    "color": rep.color,
                    "feedback": rep.feedback,
                    "recommendations": rep.recommendations,
                }
                for name, rep in self.components.items()
            },
            "composite": self.composite,
            "dataset_size_at_eval": self.dataset_size_at_eval,
        }


def color_for_percentile(p: float, red_below: float, green_at_or_above: float) -> str:
    if p < red_below:
        return "red"
    if p >= green_at_or_above:
        return "green"
    return "yellow"


def percentile_of(value: float, population: Sequence[float]) -> float:
    """Mid-rank percentile of ``value`` within ``population``."""
    if not population:
        return 0.5
    less = sum(1 for v in population if v < value)
    equal = sum(1 for v in population if v == value)
    return (less + 0.5 * equal) / len(population)


def nmi_from_table(table: np.ndarray) -> float:
    """I(X;Y) / min(H(X), H(Y)) from a joint count table; 0 when a marginal
    entropy vanishes."""
    n = table.sum()
    if n <= 0:
        return 0.0
    pxy = table / n
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    hx = -sum(p * math.log(p) for p in px if p > 0)
    hy = -sum(p * math.log(p) for p in py if p > 0)
    hmin = min(hx, hy)
    if hmin <= 0:
        return 0.0
    info = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            p = pxy[i, j]
            if p > 0:
                info += p * math.log(p / (px[i] * py[j]))
    return min(1.0, max(0.0, info / hmin))


def _bin_of(value: float, bins: int) -> int:
    return min(int(max(value, 0.0) * bins), bins - 1)


def _harmonic(a: float, b: float) -> float:
    if a + b <= 0:
        return 0.0
    return 2.0 * a * b / (a + b)


def _dispersion(sum_l: float, sum_l2: float, n: int) -> float:
    if n <= 0:
        return 0.0
    mean = sum_l / n
    if mean <= 0:
        return 0.0
    var = max(sum_l2 / n - mean * mean, 0.0)
    cv = math.sqrt(var) / mean
    return cv / (1.0 + cv)


def _norm_entropy(total: float, sum_clogc: float, support: int) -> float:
    """H / log(support) from the count-sum statistics; degenerate support -> 1."""
    if support <= 1 or total <= 0:
        return 1.0
    h = math.log(total) - sum_clogc / total
    return min(1.0, max(0.0, h / math.log(support)))


def _top2_per_row(sim: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-row largest and second-largest off-diagonal entries with indices."""
    n = sim.shape[0]
    work = sim.copy()
    np.fill_diagonal(work, -np.inf)
    a1 = work.argmax(axis=1)
    v1 = work[np.arange(n), a1]
    work[np.arange(n), a1] = -np.inf
    a2 = work.argmax(axis=1)
    v2 = work[np.arange(n), a2]
    return v1, a1, v2, a2


class _Absent:
    pass


_ABSENT = _Absent()


class DqiEngine:
    """Precomputes sufficient statistics for one immutable dataset snapshot
    and answers dataset scores and per-sample leave-one-out impacts."""

    def __init__(self, dataset: Dataset, emb: Optional[EmbeddingMatrix] = None,
                 cfg: Optional[DqiConfig] = None):
        if len(dataset) < 2:
            raise DatasetTooSmall(f"need >= 2 samples, got {len(dataset)}")
        self.dataset = dataset
        self.cfg = cfg or DqiConfig()
        self.n = len(dataset)
        self.ids = dataset.ids()
        self.index = {sid: i for i, sid in enumerate(self.ids)}
        self.labels = [s.label for s in dataset.samples]
        self.label_order = sorted(dataset.schema.labels)
        self.label_index = {lab: i for i, lab in enumerate(self.label_order)}
        self.n_labels = len(self.label_order)
        self.y = np.array([self.label_index[lab] for lab in self.labels])

        fields = dataset.schema.field_names
        self.field_tokens = [[tokenize(s.fields[f]) for f in fields] for s in dataset.samples]
        self.tokens = [sum(ft, []) for ft in self.field_tokens]
        self.token_sets = [set(t) for t in self.tokens]

        self._emb = self._resolve_c5_vectors(emb)
        self._prep_c1()
        self._prep_c2()
        self._prep_c3()
        self._prep_c4()
        self._prep_c5()
        self._prep_c6()
        self._prep_c7()

    # --- preparation -----------------------------------------------------

    def _resolve_c5_vectors(self, emb: Optional[EmbeddingMatrix]):
        mode = self.cfg.c5_mode
        covered = emb is not None and all(sid in emb for sid in self.ids)
        if mode == "embedding" and not covered:
            raise MissingEmbeddings("c5_mode=embedding requires rows for every sample")
        if mode == "bow":
            return None
        return emb.take(self.ids) if covered else None

    def _prep_c1(self):
        self.type_counts: Counter = Counter()
        for toks in self.tokens:
            self.type_counts.update(toks)
        self.total_tokens = sum(self.type_counts.values())
        self.n_types = len(self.type_counts)
        self.lengths = [len(t) for t in self.tokens]
        self.sum_len = float(sum(self.lengths))
        self.sum_len2 = float(sum(l * l for l in self.lengths))
        self.sample_type_counts = [Counter(t) for t in self.tokens]
        # number of types that exist only inside this sample
        self.vanishing_types = [
            sum(1 for tok, c in stc.items() if self.type_counts[tok] == c)
            for stc in self.sample_type_counts
        ]

    def _c1_value(self, n_types: int, total: int, sum_l: float, sum_l2: float, n: int) -> float:
        ttr = n_types / total if total > 0 else 0.0
        return _harmonic(ttr, _dispersion(sum_l, sum_l2, n))

    def _granularities(self) -> list[str]:
        grams = [f"{n}gram" for n in range(1, self.cfg.ngram_max + 1)]
        return grams + ["pos", "sentence"]

    def _sample_gran_counts(self, i: int, gran: str) -> Counter:
        toks = self.tokens[i]
        if gran.endswith("gram"):
            n = int(gran[:-4])
            return Counter(tuple(toks[j : j + n]) for j in range(len(toks) - n + 1))
        if gran == "pos":
            return Counter(c.value for c in tag_coarse(toks))
        if gran == "sentence":
            return Counter([tuple(toks)])
        raise ValueError(gran)

    def _prep_c2(self):
        self.gran_names = self._granularities()
        self.gran_sample_counts: dict[str, list[Counter]] = {}
        self.gran_totals: dict[str, float] = {}
        self.gran_sum_clogc: dict[str, float] = {}
        self.gran_support: dict[str, int] = {}
        self.gran_counts: dict[str, Counter] = {}
        for g in self.gran_names:
            per_sample = [self._sample_gran_counts(i, g) for i in range(self.n)]
            counts: Counter = Counter()
            for c in per_sample:
                counts.update(c)
            self.gran_sample_counts[g] = per_sample
            self.gran_counts[g] = counts
            self.gran_totals[g] = float(sum(counts.values()))
            self.gran_sum_clogc[g] = float(sum(c * math.log(c) for c in counts.values()))
            self.gran_support[g] = len(counts)

    def _c2_value(self, totals, sum_clogc, support) -> float:
        parts = [_norm_entropy(totals[g], sum_clogc[g], support[g]) for g in self.gran_names]
        return sum(parts) / len(parts)

    def _prep_c3(self):
        vocab = {tok: j for j, tok in enumerate(sorted(set().union(*self.token_sets)))} \
            if any(self.token_sets) else {}
        rows, cols = [], []
        for i, ts in enumerate(self.token_sets):
            for tok in ts:
                rows.append(i)
                cols.append(vocab[tok])
        data = np.ones(len(rows), dtype=np.int32)
        A = sp.csr_matrix((data, (rows, cols)), shape=(self.n, max(len(vocab), 1)))
        inter = (A @ A.T).toarray().astype(np.float64)
        sizes = np.array([len(ts) for ts in self.token_sets], dtype=np.float64)
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(divide="ignore", invalid="ignore"):
            jac = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
        self._jac = jac
        v1, a1, v2, a2 = _top2_per_row(jac)
        self.c3_top1, self.c3_arg1, self.c3_top2 = v1, a1, v2
        self.c3_sum = float(np.sum(1.0 - v1))
        self.c3_affected: dict[int, list[int]] = {}
        for i, a in enumerate(a1):
            self.c3_affected.setdefault(int(a), []).append(i)

    def _prep_c4(self):
        self.c4_defined = len(self.dataset.schema.field_names) >= 2
        if not self.c4_defined:
            return
        overlaps = []
        for ft in self.field_tokens:
            fsets = [set(t) for t in ft]
            pairs = [
                _jaccard_sets(fsets[i], fsets[j])
                for i in range(len(fsets))
                for j in range(i + 1, len(fsets))
            ]
            overlaps.append(sum(pairs) / len(pairs))
        self.c4_stat = overlaps
        self.c4_bins = [_bin_of(v, self.cfg.mi_bins) for v in overlaps]
        self.c4_table = _joint_table(self.c4_bins, self.y, self.cfg.mi_bins, self.n_labels)

    def _prep_c5(self):
        if self._emb is not None:
            V = self._emb.rows.astype(np.float64)
            norms = np.linalg.norm(V, axis=1, keepdims=True)
            Vn = np.divide(V, norms, out=np.zeros_like(V), where=norms > 0)
            sim = Vn @ Vn.T
        else:
            # sparse count vectors; keeps memory linear in corpus token mass
            vocab = {tok: j for j, tok in enumerate(sorted(self.type_counts))}
            rows, cols, data = [], [], []
            for i, stc in enumerate(self.sample_type_counts):
                for tok, c in stc.items():
                    rows.append(i)
                    cols.append(vocab[tok])
                    data.append(float(c))
            A = sp.csr_matrix((data, (rows, cols)),
                              shape=(self.n, max(len(vocab), 1)))
            norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
            scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
            An = sp.diags(scale) @ A
            sim = (An @ An.T).toarray()
        v1, a1, v2, a2 = _top2_per_row(sim)
        self.c5_top1, self.c5_arg1, self.c5_top2 = v1, a1, v2
        self.c5_bins = [_bin_of(v, self.cfg.mi_bins) for v in v1]
        self.c5_table = _joint_table(self.c5_bins, self.y, self.cfg.mi_bins, self.n_labels)
        self.c5_affected: dict[int, list[int]] = {}
        for i, a in enumerate(a1):
            self.c5_affected.setdefault(int(a), []).append(i)

    def _prep_c6(self):
        feats = sorted(set().union(*[set(t) for t in self.tokens])) if self.n else []
        self.c6_feat_index = {f: j for j, f in enumerate(feats)}
        nf = len(feats)
        rows, cols = [], []
        for i, ts in enumerate(self.token_sets):
            for tok in ts:
                rows.append(i)
                cols.append(self.c6_feat_index[tok])
        data = np.ones(len(rows), dtype=np.float64)
        P = sp.csr_matrix((data, (rows, cols)), shape=(self.n, max(nf, 1)))
        self.c6_presence = P
        self.c6_presence_csc = P.tocsc()
        self.c6_nf = np.asarray(P.sum(axis=0)).ravel()  # n(f)
        nfl = np.zeros((max(nf, 1), self.n_labels))
        for lab_idx in range(self.n_labels):
            rows_l = np.flatnonzero(self.y == lab_idx)
            if len(rows_l):
                nfl[:, lab_idx] = np.asarray(P[rows_l].sum(axis=0)).ravel()
        self.c6_nfl = nfl
        self.c6_nl = np.array([np.sum(self.y == j) for j in range(self.n_labels)], dtype=np.float64)
        a = self.cfg.pmi_alpha
        L = self.n_labels
        # cached per-sample log sums: A = sum log2(n(f,l)+a), B = sum log2(n(f)+L*a)
        logs_nf = np.log2(self.c6_nf + L * a, where=(self.c6_nf + L * a) > 0,
                          out=np.zeros_like(self.c6_nf))
        logs_nfl = np.zeros_like(nfl)
        mask = (nfl + a) > 0
        logs_nfl[mask] = np.log2(nfl[mask] + a)
        self._c6_logs_nf = logs_nf
        self._c6_logs_nfl = logs_nfl
        self.c6_k = np.array([len(ts) for ts in self.token_sets], dtype=np.float64)
        A = np.zeros(self.n)
        B = np.zeros(self.n)
        for i, ts in enumerate(self.token_sets):
            if not ts:
                continue
            idx = [self.c6_feat_index[tok] for tok in ts]
            A[i] = logs_nfl[idx, self.y[i]].sum()
            B[i] = logs_nf[idx].sum()
        self.c6_A = A
        self.c6_B = B
        self.c6_g = self._c6_sample_scores(A, B, self.c6_k, self.y, self.n, self.c6_nl)

    def _c6_sample_scores(self, A, B, k, y, n, nl) -> np.ndarray:
        a = self.cfg.pmi_alpha
        L = self.n_labels
        shift_const = math.log2(n + 2.0 * L * a)
        nl_term = np.where(nl + 2.0 * a > 0, np.log2(np.maximum(nl + 2.0 * a, 1e-300)), 0.0)
        g = np.ones(len(A))
        nonempty = k > 0
        mu = np.zeros(len(A))
        mu[nonempty] = (A[nonempty] - B[nonempty]) / k[nonempty] \
            + shift_const - nl_term[y[nonempty]]
        g[nonempty] = 1.0 / (1.0 + np.maximum(0.0, mu[nonempty]))
        return g

    def _prep_c7(self):
        train_idx = [i for i, s in enumerate(self.dataset.samples) if s.split == "train"]
        eval_idx = [i for i, s in enumerate(self.dataset.samples)
                    if s.split is not None and s.split != "train"]
        self.c7_defined = bool(train_idx) and bool(eval_idx)
        self.c7_train_idx = train_idx
        self.c7_eval_idx = eval_idx
        if not self.c7_defined:
            return
        cross = self._jac[np.ix_(eval_idx, train_idx)]
        t1 = cross.argmax(axis=1)
        v1 = cross[np.arange(len(eval_idx)), t1]
        if len(train_idx) >= 2:
            work = cross.copy()
            work[np.arange(len(eval_idx)), t1] = -np.inf
            t2 = work.argmax(axis=1)
            v2 = work[np.arange(len(eval_idx)), t2]
        else:
            v2 = np.full(len(eval_idx), np.nan)
        self.c7_top1 = v1
        self.c7_arg1 = np.array([train_idx[j] for j in t1])  # dataset indices
        self.c7_top2 = v2
        self.c7_sum = float(np.sum(1.0 - v1))

    # --- dataset-level scores --------------------------------------------

    def scores(self) -> DqiVector:
        if getattr(self, "_cached_scores", None) is not None:
            return self._cached_scores
        v = self._compute_scores()
        self._cached_scores = v
        return v

    def _compute_scores(self) -> DqiVector:
        v = DqiVector()
        v.c1 = self._c1_value(self.n_types, self.total_tokens, self.sum_len, self.sum_len2, self.n)
        v.c2 = self._c2_value(self.gran_totals, self.gran_sum_clogc, self.gran_support)
        v.c3 = self.c3_sum / self.n
        if self.c4_defined:
            v.c4 = 1.0 - nmi_from_table(self.c4_table)
        v.c5 = 1.0 - nmi_from_table(self.c5_table)
        v.c6 = float(np.mean(self.c6_g))
        if self.c7_defined:
            v.c7 = self.c7_sum / len(self.c7_eval_idx)
        _check_unit_range(v)
        return v

    # --- leave-one-out ----------------------------------------------------

    def impact(self, sample_id: str, components: Optional[Sequence[str]] = None) -> ImpactVector:
        if sample_id not in self.index:
            raise UnknownId(sample_id)
        if self.n < 3:
            raise DatasetTooSmall("leave-one-out needs >= 3 samples")
        if self.cfg.standalone_scores:
            return self._standalone(self.index[sample_id], components)
        base = self.scores()
        loo = self._loo_scores(self.index[sample_id], components)
        iv = ImpactVector()
        want = components or COMPONENTS
        for c in want:
            b = base.get(c)
            l = loo.get(c)
            if b is not None and not isinstance(l, _Absent) and l is not None:
                setattr(iv, c, b - l)
        return iv

    def impacts(self, ids: Optional[Sequence[str]] = None,
                components: Optional[Sequence[str]] = None) -> dict[str, ImpactVector]:
        wanted = self.ids if ids is None else list(ids)
        return {sid: self.impact(sid, components) for sid in wanted}

    def _standalone(self, x: int, components: Optional[Sequence[str]]) -> ImpactVector:
        """Per-sample standalone quality scores for components that have a
        natural per-sample term; the rest stay absent."""
        iv = ImpactVector()
        want = components or COMPONENTS
        if "c3" in want:
            iv.c3 = float(1.0 - self.c3_top1[x])
        if "c5" in want:
            iv.c5 = float(1.0 - max(self.c5_top1[x], 0.0))
        if "c6" in want:
            iv.c6 = float(self.c6_g[x])
        if "c7" in want and self.c7_defined and x in self.c7_eval_idx:
            pos = self.c7_eval_idx.index(x)
            iv.c7 = float(1.0 - self.c7_top1[pos])
        return iv

    def _loo_scores(self, x: int, components: Optional[Sequence[str]] = None) -> ComponentValues:
        want = set(components or COMPONENTS)
        out = ComponentValues()
        if "c1" in want:
            out.c1 = self._loo_c1(x)
        if "c2" in want:
            out.c2 = self._loo_c2(x)
        if "c3" in want:
            out.c3 = self._loo_c3(x)
        if "c4" in want and self.c4_defined:
            out.c4 = self._loo_c4(x)
        if "c5" in want:
            out.c5 = self._loo_c5(x)
        if "c6" in want:
            out.c6 = self._loo_c6(x)
        if "c7" in want and self.c7_defined:
            val = self._loo_c7(x)
            out.c7 = None if isinstance(val, _Absent) else val
        return out

    def _loo_c1(self, x: int) -> float:
        types = self.n_types - self.vanishing_types[x]
        total = self.total_tokens - self.lengths[x]
        lx = float(self.lengths[x])
        return self._c1_value(types, total, self.sum_len - lx,
                              self.sum_len2 - lx * lx, self.n - 1)

    def _loo_c2(self, x: int) -> float:
        totals, sum_clogc, support = {}, {}, {}
        for g in self.gran_names:
            delta = self.gran_sample_counts[g][x]
            counts = self.gran_counts[g]
            z = self.gran_totals[g]
            s = self.gran_sum_clogc[g]
            supp = self.gran_support[g]
            for f, df in delta.items():
                c = counts[f]
                c2 = c - df
                s -= c * math.log(c)
                if c2 > 0:
                    s += c2 * math.log(c2)
                else:
                    supp -= 1
                z -= df
            totals[g], sum_clogc[g], support[g] = z, s, supp
        return self._c2_value(totals, sum_clogc, support)

    def _loo_c3(self, x: int) -> float:
        total = self.c3_sum - (1.0 - self.c3_top1[x])
        for i in self.c3_affected.get(x, ()):
            if i != x:
                total += self.c3_top1[i] - self.c3_top2[i]
        return total / (self.n - 1)

    def _loo_c4(self, x: int) -> float:
        table = self.c4_table.copy()
        table[self.c4_bins[x], self.y[x]] -= 1
        return 1.0 - nmi_from_table(table)

    def _loo_c5(self, x: int) -> float:
        table = self.c5_table.copy()
        table[self.c5_bins[x], self.y[x]] -= 1
        for i in self.c5_affected.get(x, ()):
            if i == x:
                continue
            nb = _bin_of(float(self.c5_top2[i]), self.cfg.mi_bins)
            ob = self.c5_bins[i]
            if nb != ob:
                table[ob, self.y[i]] -= 1
                table[nb, self.y[i]] += 1
        return 1.0 - nmi_from_table(table)

    def _loo_c6(self, x: int) -> float:
        a = self.cfg.pmi_alpha
        L = self.n_labels
        lam = int(self.y[x])
        cols = np.array([self.c6_feat_index[tok] for tok in self.token_sets[x]], dtype=np.intp)
        A2 = self.c6_A.copy()
        B2 = self.c6_B.copy()
        if len(cols):
            nf = self.c6_nf[cols]
            nfl = self.c6_nfl[cols, lam]
            ok_f = (nf - 1 + L * a) > 0
            d_marg = np.zeros(len(cols))
            d_marg[ok_f] = self._c6_logs_nf[cols[ok_f]] - np.log2(nf[ok_f] - 1 + L * a)
            ok_j = (nfl - 1 + a) > 0
            d_joint = np.zeros(len(cols))
            d_joint[ok_j] = self._c6_logs_nfl[cols[ok_j], lam] - np.log2(nfl[ok_j] - 1 + a)
            csc = self.c6_presence_csc
            corr_b = np.zeros(self.n)
            corr_a = np.zeros(self.n)
            for j, f in enumerate(cols):
                rows = csc.indices[csc.indptr[f] : csc.indptr[f + 1]]
                corr_b[rows] += d_marg[j]
                corr_a[rows] += d_joint[j]
            B2 -= corr_b
            A2 -= np.where(self.y == lam, corr_a, 0.0)
        nl2 = self.c6_nl.copy()
        nl2[lam] -= 1
        keep = np.ones(self.n, dtype=bool)
        keep[x] = False
        g = self._c6_sample_scores(A2[keep], B2[keep], self.c6_k[keep],
                                   self.y[keep], self.n - 1, nl2)
        return float(np.mean(g))

    def _loo_c7(self, x: int):
        if x in self.c7_train_idx:
            if len(self.c7_train_idx) == 1:
                return _ABSENT
            total = self.c7_sum
            for pos, i in enumerate(self.c7_eval_idx):
                if self.c7_arg1[pos] == x:
                    total += self.c7_top1[pos] - self.c7_top2[pos]
            return total / len(self.c7_eval_idx)
        try:
            pos = self.c7_eval_idx.index(x)
        except ValueError:
            return self.c7_sum / len(self.c7_eval_idx)
        if len(self.c7_eval_idx) == 1:
            return _ABSENT
        return (self.c7_sum - (1.0 - self.c7_top1[pos])) / (len(self.c7_eval_idx) - 1)

    # --- report helpers ----------------------------------------------------

    def lexical_neighbor(self, x: int) -> tuple[str, float]:
        return self.ids[int(self.c3_arg1[x])], float(self.c3_top1[x])

    def semantic_neighbor(self, x: int) -> tuple[str, float]:
        return self.ids[int(self.c5_arg1[x])], float(self.c5_top1[x])

    def token_pmi(self, x: int) -> list[tuple[str, float]]:
        """(token, pmi-with-own-label) pairs for one sample, highest first."""
        a = self.cfg.pmi_alpha
        L = self.n_labels
        lam = int(self.y[x])
        out = []
        for tok in sorted(self.token_sets[x]):
            f = self.c6_feat_index[tok]
            num = self._c6_logs_nfl[f, lam]
            val = num - self._c6_logs_nf[f] + math.log2(self.n + 2.0 * L * a) \
                - math.log2(self.c6_nl[lam] + 2.0 * a)
            out.append((tok, float(val)))
        out.sort(key=lambda tv: (-tv[1], tv[0]))
        return out


def _jaccard_sets(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _joint_table(bins: Sequence[int], y: np.ndarray, n_bins: int, n_labels: int) -> np.ndarray:
    table = np.zeros((n_bins, n_labels))
    for b, lab in zip(bins, y):
        table[b, lab] += 1
    return table


def _check_unit_range(v: ComponentValues) -> None:
    for c in COMPONENTS:
        val = v.get(c)
        if val is None:
            continue
        if val < -1e-9 or val > 1.0 + 1e-9:
            raise AssertionError(f"{c}={val} escaped [0,1]")
        setattr(v, c, float(min(1.0, max(0.0, val))))


# --- public operations ------------------------------------------------------

def component_scores(d: Dataset, emb: Optional[EmbeddingMatrix] = None,
                     cfg: Optional[DqiConfig] = None) -> DqiVector:
    return DqiEngine(d, emb, cfg).scores()


def sample_impact(d: Dataset, sample_id: str, emb: Optional[EmbeddingMatrix] = None,
                  cfg: Optional[DqiConfig] = None) -> ImpactVector:
    if len(d) < 3:
        raise DatasetTooSmall("sample_impact needs >= 3 samples")
    return DqiEngine(d, emb, cfg).impact(sample_id)


def composite_dqi(iv: ComponentValues, cfg: Optional[DqiConfig] = None) -> float:
    """Weighted mean of the configured sort components, renormalized over the
    components that are actually defined."""
    cfg = cfg or DqiConfig()
    total = 0.0
    weight = 0.0
    for c in cfg.sort_components:
        v = iv.get(c)
        if v is None:
            continue
        w = cfg.weights.get(c, 1.0)
        total += w * v
        weight += w
    if weight == 0.0:
        raise NoDefinedComponents(
            f"none of {cfg.sort_components} defined (or all weights zero)")
    return total / weight


_FEEDBACK = {
    "c1": "vocabulary and length diversity contribution",
    "c2": "n-gram frequency diversity contribution",
    "c3": "lexical overlap with existing samples",
    "c4": "field-overlap correlation with the label",
    "c5": "semantic similarity correlation with the label",
    "c6": "label give-away strength of this sample's wording",
    "c7": "train/eval split leakage",
}


def quality_report(state: Dataset, emb: Optional[EmbeddingMatrix],
                   draft: Sample, cfg: Optional[DqiConfig] = None) -> DqiReport:
    """Score a draft against the current dataset state.

    The draft joins the state for one evaluation; its per-component impact is
    ranked against every state sample's impact, and the rank drives the
    red/yellow/green signal.  Red components always carry at least one
    recommendation naming the offending feature.
    """
    cfg = cfg or DqiConfig()
    if len(state) < 2:
        raise EmptyState("state needs >= 2 samples to rank a draft against")
    try:
        validate_sample(state.schema, draft)
    except Exception as e:
        raise SchemaMismatch(str(e)) from e
    if draft.id in state:
        raise SchemaMismatch(f"draft id {draft.id!r} already exists in the dataset state")

    combined = state.with_sample(draft)
    use_emb = emb if (emb is not None and all(s in emb for s in combined.ids())) else None
    if cfg.c5_mode == "embedding" and use_emb is None:
        raise MissingEmbeddings("embedding-based c5 forced but rows are missing")
    engine = DqiEngine(combined, use_emb, cfg)
    impacts = engine.impacts()
    draft_iv = impacts[draft.id]
    x = engine.index[draft.id]

    components: dict[str, ComponentReport] = {}
    for c in draft_iv.defined():
        population = [impacts[sid].get(c) for sid in state.ids()]
        population = [p for p in population if p is not None]
        q = draft_iv.get(c)
        p = percentile_of(q, population)
        color = color_for_percentile(p, cfg.red_below, cfg.green_at_or_above)
        feedback = (f"{_FEEDBACK[c]}: impact {q:+.6f}, "
                    f"better than {100 * p:.0f}% of current samples")
        recs: list[dict] = []
        if color == "red":
            recs = _recommendations_for(c, engine, x, draft)
        components[c] = ComponentReport(score=float(q), percentile=p, color=color,
                                        feedback=feedback, recommendations=recs)

    composite = composite_dqi(draft_iv, cfg)
    return DqiReport(components=components, composite=composite,
                     dataset_size_at_eval=len(state))


def _recommendations_for(c: str, engine: DqiEngine, x: int, draft: Sample) -> list[dict]:
    if c == "c3":
        nid, val = engine.lexical_neighbor(x)
        return [{"kind": "near_duplicate",
                 "detail": f"wording nearly duplicates sample {nid} "
                           f"(overlap {val:.2f}); rephrase or replace it"}]
    if c == "c5":
        nid, val = engine.semantic_neighbor(x)
        return [{"kind": "semantic_near_duplicate",
                 "detail": f"meaning closely matches sample {nid} "
                           f"(cosine {val:.2f}); vary the scenario"}]
    if c == "c6":
        ranked = engine.token_pmi(x)
        recs = [{"kind": "giveaway_token",
                 "detail": f"token '{tok}' strongly signals label "
                           f"'{draft.label}' (pmi {val:.2f} bits); reword without it"}
                for tok, val in ranked[:2] if val > 0]
        if recs:
            return recs
        return [{"kind": "giveaway_token",
                 "detail": "wording correlates with this label; vary phrasing"}]
    if c == "c4":
        shared = _shared_field_tokens(engine, x)
        what = f"shared words like {shared}" if shared else "the shared words"
        return [{"kind": "field_overlap",
                 "detail": f"the overlap between this sample's fields "
                           f"(stat {engine.c4_stat[x]:.2f}) is predictive of its "
                           f"label; vary {what}"}]
    if c == "c1":
        mean_len = engine.sum_len / engine.n
        return [{"kind": "low_diversity",
                 "detail": f"sample adds little vocabulary or length variety "
                           f"({engine.lengths[x]} tokens vs corpus mean "
                           f"{mean_len:.1f}); use fresh words or a different "
                           f"sentence shape"}]
    if c == "c2":
        feature = _most_common_ngram(engine, x)
        what = f"the frequent phrase '{feature}'" if feature else "common phrasings"
        return [{"kind": "repetitive_ngrams",
                 "detail": f"sample repeats {what}; vary word order and phrasing"}]
    if c == "c7":
        return [{"kind": "split_leakage",
                 "detail": "sample is close to a train-split sample; "
                           "change content to avoid leakage"}]
    return []


def _shared_field_tokens(engine: DqiEngine, x: int) -> str:
    fields = engine.field_tokens[x]
    if len(fields) < 2:
        return ""
    shared = sorted(set(fields[0]) & set(fields[1]))[:3]
    return ", ".join(f"'{t}'" for t in shared)


def _most_common_ngram(engine: DqiEngine, x: int) -> str:
    best, best_count = "", 1
    for gran in engine.gran_names:
        if not gran.endswith("gram") or gran == "1gram":
            continue
        counts = engine.gran_counts[gran]
        for feat in engine.gran_sample_counts[gran][x]:
            if counts[feat] > best_count:
                best, best_count = " ".join(feat), counts[feat]
    return best
