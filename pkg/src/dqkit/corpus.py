"""Canonical data model and persistence for task datasets.

Datasets are stored as line-delimited JSON, one object per line, UTF-8,
LF-terminated::

    {"id": "s1", "fields": {"premise": "...", "hypothesis": "..."}, "label": "entailment", "split": "train"}

``split`` is optional and omitted when unset.  Datasets are immutable after
load: every transformation returns a new ``Dataset``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import (
    DatasetTooSmall,
    DuplicateId,
    IoFailure,
    MalformedRecord,
    UnknownLabel,
)


@dataclass(frozen=True)
class TaskSchema:
    """Names the text fields and the closed label set of a task."""

    name: str
    field_names: tuple[str, ...]
    labels: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "field_names", tuple(self.field_names))
        object.__setattr__(self, "labels", frozenset(self.labels))
        if not self.field_names:
            raise ValueError("schema needs at least one field")
        if len(set(self.field_names)) != len(self.field_names):
            raise ValueError("field names must be unique")
        if not self.labels:
            raise ValueError("schema needs at least one label")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "field_names": list(self.field_names),
            "labels": sorted(self.labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSchema":
        return cls(name=d["name"], field_names=tuple(d["field_names"]), labels=frozenset(d["labels"]))


@dataclass
class Sample:
    """One identified text record.  Treated as immutable after construction."""

    id: str
    fields: dict[str, str]
    label: str
    split: Optional[str] = None

    def text(self, field_names: Iterable[str]) -> str:
        return " ".join(self.fields[f] for f in field_names)

    def to_record(self) -> dict:
        rec = {"id": self.id, "fields": dict(self.fields), "label": self.label}
        if self.split is not None:
            rec["split"] = self.split
        return rec


@dataclass
class Dataset:
    """An ordered, id-unique collection of samples under one schema."""

    schema: TaskSchema
    samples: list[Sample]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, int] = {}
        for i, s in enumerate(self.samples):
            if s.id in index:
                raise DuplicateId(s.id)
            index[s.id] = i
        self._index = index

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._index

    def get(self, sample_id: str) -> Sample:
        return self.samples[self._index[sample_id]]

    def labels(self) -> list[str]:
        return [s.label for s in self.samples]

    def subset(self, keep_ids: Iterable[str]) -> "Dataset":
        """New dataset containing ``keep_ids``, preserving the current order."""
        keep = set(keep_ids)
        return Dataset(self.schema, [s for s in self.samples if s.id in keep])

    def without(self, drop_ids: Iterable[str]) -> "Dataset":
        drop = set(drop_ids) if not isinstance(drop_ids, str) else {drop_ids}
        return Dataset(self.schema, [s for s in self.samples if s.id not in drop])

    def with_sample(self, sample: Sample) -> "Dataset":
        return Dataset(self.schema, self.samples + [sample])


def validate_sample(schema: TaskSchema, sample: Sample) -> None:
    """Raise if the sample does not satisfy the schema contract."""
    if not sample.id:
        raise MalformedRecord(0, "empty sample id")
    missing = [f for f in schema.field_names if f not in sample.fields]
    if missing:
        raise MalformedRecord(0, f"sample {sample.id!r} missing fields {missing}")
    if sample.label not in schema.labels:
        raise UnknownLabel(sample.id, sample.label)


def _record_to_sample(rec: dict, schema: TaskSchema, line_no: int) -> Sample:
    if not isinstance(rec, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")
    for key in ("id", "fields", "label"):
        if key not in rec:
            raise MalformedRecord(line_no, f"missing key {key!r}")
    if not isinstance(rec["fields"], dict):
        raise MalformedRecord(line_no, "'fields' is not an object")
    sid = rec["id"]
    if not isinstance(sid, str) or not sid:
        raise MalformedRecord(line_no, "'id' must be a non-empty string")
    fields = {k: str(v) for k, v in rec["fields"].items()}
    missing = [f for f in schema.field_names if f not in fields]
    if missing:
        raise MalformedRecord(line_no, f"missing schema fields {missing}")
    label = rec["label"]
    if label not in schema.labels:
        raise UnknownLabel(sid, label)
    split = rec.get("split")
    if split is not None and not isinstance(split, str):
        raise MalformedRecord(line_no, "'split' must be a string when present")
    return Sample(id=sid, fields=fields, label=label, split=split)


def load_dataset(path: str | Path, schema: TaskSchema) -> Dataset:
    """Load a JSONL dataset, preserving file order."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoFailure(str(e)) from e
    samples: list[Sample] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord(line_no, f"invalid JSON: {e.msg}") from e
        sample = _record_to_sample(rec, schema, line_no)
        if sample.id in seen:
            raise DuplicateId(sample.id)
        seen.add(sample.id)
        samples.append(sample)
    return Dataset(schema, samples)


def write_dataset(d: Dataset, path: str | Path) -> None:
    """Write JSONL such that ``load_dataset`` reproduces ``d`` exactly."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for s in d.samples:
                fh.write(json.dumps(s.to_record(), ensure_ascii=False))
                fh.write("\n")
    except OSError as e:
        raise IoFailure(str(e)) from e


def split_dataset(d: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive partition with ``|part_a| = floor(fraction * |d|)``.

    Deterministic given (d, fraction, seed).  Both parts preserve the parent's
    sample order.
    """
    if len(d) < 2:
        raise DatasetTooSmall(f"need at least 2 samples, got {len(d)}")
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must lie in (0, 1)")
    n = len(d)
    # tiny epsilon guards against float droop on exact products like 0.7 * 10
    size_a = int(math.floor(fraction * n + 1e-9))
    rng = np.random.default_rng(_u64(seed))
    picked = set(rng.permutation(n)[:size_a].tolist())
    part_a = [s for i, s in enumerate(d.samples) if i in picked]
    part_b = [s for i, s in enumerate(d.samples) if i not in picked]
    return Dataset(d.schema, part_a), Dataset(d.schema, part_b)


def infer_schema(path: str | Path, name: str = "inferred") -> TaskSchema:
    """Derive a schema from a JSONL file: field order from the first record,
    labels from the union over all records."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoFailure(str(e)) from e
    field_names: tuple[str, ...] | None = None
    labels: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord(line_no, f"invalid JSON: {e.msg}") from e
        if not isinstance(rec, dict) or "fields" not in rec or "label" not in rec:
            raise MalformedRecord(line_no, "record lacks 'fields'/'label'")
        if field_names is None:
            field_names = tuple(rec["fields"].keys())
        labels.add(rec["label"])
    if field_names is None or not labels:
        raise EmptyDatasetFile(str(path))
    return TaskSchema(name=name, field_names=field_names, labels=frozenset(labels))


class EmptyDatasetFile(IoFailure):
    pass


def load_schema(path: str | Path) -> TaskSchema:
    try:
        return TaskSchema.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as e:
        raise IoFailure(str(e)) from e


def _u64(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF
