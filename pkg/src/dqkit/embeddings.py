"""Binary codec for per-sample feature vectors plus similarity primitives.

File format ("EMB1"), little-endian throughout::

    bytes 0-3   magic b"EMB1"
    u32         version (currently 1)
    u64         row count
    u32         dim
    rows        row-major float32, row count x dim

Sample ids live in a sidecar manifest ``<path>.manifest.json`` with keys
``order`` (ids aligned to rows), ``burned`` (ids excluded from any training
or pruning downstream), ``source`` (free-form provenance) and ``dim``.
Keeping the binary rectangular makes it trivially memory-mappable.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    InvariantViolation,
    IoFailure,
    KOutOfRange,
    TruncatedFile,
    UnknownId,
    VersionMismatch,
)

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sIQI")


@dataclass
class EmbeddingMatrix:
    """Dense float32 feature rows aligned with an id ordering."""

    rows: np.ndarray  # (n, dim) float32
    order: list[str]

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise InvariantViolation("rows must be a 2-D array")
        if len(self.order) != self.rows.shape[0]:
            raise InvariantViolation("order length must equal row count")
        if len(set(self.order)) != len(self.order):
            raise InvariantViolation("ids in order must be distinct")
        if self.rows.size and not np.isfinite(self.rows).all():
            raise InvariantViolation("rows contain NaN or Inf")
        self._index = {sid: i for i, sid in enumerate(self.order)}

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._index

    def row(self, sample_id: str) -> np.ndarray:
        if sample_id not in self._index:
            raise UnknownId(sample_id)
        return self.rows[self._index[sample_id]]

    def take(self, ids: Sequence[str]) -> "EmbeddingMatrix":
        """Sub-matrix for the given ids, in the given order."""
        idx = []
        for sid in ids:
            if sid not in self._index:
                raise UnknownId(sid)
            idx.append(self._index[sid])
        return EmbeddingMatrix(self.rows[idx], list(ids))


@dataclass
class EmbManifest:
    order: list[str]
    burned: list[str] = field(default_factory=list)
    source: str = ""
    dim: int = 0

    def __post_init__(self):
        if set(self.order) & set(self.burned):
            raise InvariantViolation("order and burned must be disjoint")

    def to_dict(self) -> dict:
        return {"order": list(self.order), "burned": list(self.burned),
                "source": self.source, "dim": int(self.dim)}

    @classmethod
    def from_dict(cls, d: dict) -> "EmbManifest":
        return cls(order=list(d["order"]), burned=list(d["burned"]),
                   source=d.get("source", ""), dim=int(d["dim"]))


def manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".manifest.json")


def emb_to_bytes(m: EmbeddingMatrix) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, len(m), m.dim)
    body = m.rows.astype("<f4", copy=False).tobytes()
    return header + body


def emb_from_bytes(data: bytes, manifest: EmbManifest) -> EmbeddingMatrix:
    if len(data) < _HEADER.size:
        raise TruncatedFile("header shorter than fixed header size")
    magic, version, count, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"expected version {VERSION}, found {version}")
    if dim < 1:
        raise DimMismatch(f"header dim must be >= 1, found {dim}")
    if manifest.dim != dim:
        raise DimMismatch(f"manifest dim {manifest.dim} != header dim {dim}")
    if len(manifest.order) != count:
        raise DimMismatch(f"manifest lists {len(manifest.order)} ids, header {count} rows")
    need = count * dim * 4
    if len(data) - _HEADER.size < need:
        raise TruncatedFile(f"need {need} data bytes, found {len(data) - _HEADER.size}")
    raw = np.frombuffer(data, dtype="<f4", count=count * dim, offset=_HEADER.size)
    rows = raw.reshape(count, dim).copy()
    if rows.size and not np.isfinite(rows).all():
        raise InvariantViolation("stored rows contain NaN or Inf")
    return EmbeddingMatrix(rows, list(manifest.order))


def write_emb(m: EmbeddingMatrix, manifest: EmbManifest, path: str | Path) -> None:
    """Emit ``<path>`` plus ``<path>.manifest.json``; round-trips bit-exactly."""
    if manifest.dim != m.dim or manifest.order != m.order:
        raise InvariantViolation("manifest does not describe this matrix")
    try:
        Path(path).write_bytes(emb_to_bytes(m))
        manifest_path(path).write_text(
            json.dumps(manifest.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as e:
        raise IoFailure(str(e)) from e


def read_emb(path: str | Path) -> tuple[EmbeddingMatrix, EmbManifest]:
    try:
        data = Path(path).read_bytes()
        mdata = json.loads(manifest_path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoFailure(str(e)) from e
    manifest = EmbManifest.from_dict(mdata)
    return emb_from_bytes(data, manifest), manifest


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Standard cosine; any zero vector yields 0.0 by convention."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimMismatch(f"shapes {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def nearest(m: EmbeddingMatrix, sample_id: str, k: int) -> list[tuple[str, float]]:
    """Exact scan for the k most cosine-similar rows, excluding the query.

    Ties resolve by lexicographic id order.
    """
    if sample_id not in m:
        raise UnknownId(sample_id)
    if not (1 <= k < len(m)):
        raise KOutOfRange(f"k must satisfy 1 <= k < {len(m)}, got {k}")
    q = m.row(sample_id)
    scored = [
        (other, cosine(q, m.rows[i]))
        for i, other in enumerate(m.order)
        if other != sample_id
    ]
    scored.sort(key=lambda sc: (-sc[1], sc[0]))
    return scored[:k]
