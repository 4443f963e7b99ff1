"""Linear-probe evaluation of a training set against an IID dev set and any
number of out-of-distribution sets, rendered as a size/IID/OOD table.

Accuracies are stored as fractions in [0, 1] and rendered as percentages.
Every report carries a banner noting that the numbers come from linear
probes over fixed features and are not comparable to full fine-tuning runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import Dataset
from .embeddings import EmbeddingMatrix
from .errors import CoverageGap, EmptyEvalSet, LabelMismatch
from .linmodels import TrainConfig, accuracy, train_logreg, train_svm

BANNER = "probe-based evaluation over fixed features; not comparable to full fine-tuning numbers"


@dataclass
class EvalRow:
    train_name: str
    train_size: int
    iid_accuracy: float
    ood: dict[str, float]
    probe: str = "logreg"

    def to_dict(self) -> dict:
        return {
            "train_name": self.train_name,
            "train_size": self.train_size,
            "iid_accuracy": self.iid_accuracy,
            "ood": dict(self.ood),
            "probe": self.probe,
        }


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    banner: str = BANNER

    def ood_names(self) -> list[str]:
        names: list[str] = []
        for row in self.rows:
            for name in row.ood:
                if name not in names:
                    names.append(name)
        return names

    def to_dict(self) -> dict:
        return {"banner": self.banner, "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        rows = [EvalRow(train_name=r["train_name"], train_size=r["train_size"],
                        iid_accuracy=r["iid_accuracy"], ood=dict(r["ood"]),
                        probe=r.get("probe", "logreg"))
                for r in d["rows"]]
        return cls(rows=rows, banner=d.get("banner", BANNER))


class _FeatureLookup:
    def __init__(self, matrices: Sequence[EmbeddingMatrix]):
        self._sources = list(matrices)

    def rows_for(self, d: Dataset, what: str) -> np.ndarray:
        out = []
        for sid in d.ids():
            for m in self._sources:
                if sid in m:
                    out.append(m.row(sid))
                    break
            else:
                raise CoverageGap(f"{what}: no embedding row for sample {sid!r}")
        return np.asarray(out, dtype=np.float64)


def evaluate(
    train: Dataset,
    dev: Dataset,
    ood: Mapping[str, Dataset],
    features: Sequence[EmbeddingMatrix] | EmbeddingMatrix,
    probe: Optional[TrainConfig] = None,
    train_name: str = "train",
) -> EvalReport:
    """Train both probes on ``train``, keep the one with the better dev
    accuracy (ties go to logreg), and score every eval set with it."""
    probe = probe or TrainConfig()
    if isinstance(features, EmbeddingMatrix):
        features = [features]
    lookup = _FeatureLookup(features)

    train_labels = set(train.labels())
    for name, ds in [("dev", dev), *ood.items()]:
        if len(ds) == 0:
            raise EmptyEvalSet(f"eval set {name!r} is empty")
        extra = set(ds.labels()) - train_labels
        if extra:
            raise LabelMismatch(f"eval set {name!r} carries unseen labels {sorted(extra)}")

    X_train = lookup.rows_for(train, "train")
    X_dev = lookup.rows_for(dev, "dev")
    y_train = train.labels()
    y_dev = dev.labels()

    candidates = []
    for kind, train_fn in (("logreg", train_logreg), ("svm", train_svm)):
        model = train_fn(X_train, y_train, probe)
        candidates.append((kind, model, accuracy(model, X_dev, y_dev)))
    # stable ordering makes the logreg-on-tie rule implicit
    kind, model, iid = max(candidates, key=lambda c: c[2])

    ood_acc = {
        name: accuracy(model, lookup.rows_for(ds, name), ds.labels())
        for name, ds in ood.items()
    }
    row = EvalRow(train_name=train_name, train_size=len(train),
                  iid_accuracy=iid, ood=ood_acc, probe=kind)
    return EvalReport(rows=[row])


def merge_reports(reports: Sequence[EvalReport]) -> EvalReport:
    merged = EvalReport(rows=[row for r in reports for row in r.rows])
    return merged


def _pct(v: float) -> str:
    s = f"{100.0 * v:.2f}".rstrip("0").rstrip(".")
    return s if s else "0"


def render_table(report: EvalReport, format: str = "text") -> str:
    """Deterministic rendering; column order is Size, IID, then eval sets in
    first-seen order."""
    if format == "json":
        return json.dumps(report.to_dict(), ensure_ascii=False, indent=2)
    names = report.ood_names()
    header = ["Name", "Size", "IID", *names]
    body = []
    for row in report.rows:
        cells = [row.train_name, str(row.train_size), _pct(row.iid_accuracy)]
        cells += [_pct(row.ood[n]) if n in row.ood else "-" for n in names]
        body.append(cells)
    if format == "markdown":
        lines = [f"> {report.banner}", ""]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join([" --- "] * len(header)) + "|")
        for cells in body:
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    if format == "text":
        widths = [max(len(header[i]), *(len(c[i]) for c in body)) if body else len(header[i])
                  for i in range(len(header))]
        lines = [f"# {report.banner}"]
        lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
        for cells in body:
            lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")
