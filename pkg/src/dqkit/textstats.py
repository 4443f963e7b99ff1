"""Deterministic text primitives.

Conventions (fixed so that downstream quality terms are exactly testable):

* ``tokenize`` lowercases and splits on maximal runs of non-alphanumeric
  characters (underscore counts as a separator); empty pieces are dropped.
* Coarse part-of-speech tagging is lexicon-first (bundled word list), then
  suffix heuristics, else OTHER.  It is intentionally tiny and replaceable.
* PMI is computed from sample-level *presence* counts: a feature counts once
  per sample regardless of repetition.  For a feature f and label l over N
  samples with add-alpha smoothing of f's presence-by-label contingency
  table (2 x L cells, L = number of schema labels):

      p(f,l) = (n(f,l) + a) / (N + 2*L*a)
      p(f)   = (n(f)   + L*a) / (N + 2*L*a)
      p(l)   = (n(l)   + 2*a) / (N + 2*L*a)
      pmi(f,l) = log2( p(f,l) / (p(f) * p(l)) )

  With a = 0 a label-independent feature scores 0 for every label it
  co-occurs with.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Sequence

from .corpus import Dataset
from .errors import EmptyDataset, InvalidOrder

_TOKEN_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


class PosClass(str, Enum):
    ADJ = "ADJ"
    ADV = "ADV"
    NOUN = "NOUN"
    VERB = "VERB"
    OTHER = "OTHER"


# suffix -> class, checked in order after the lexicon miss
_SUFFIX_RULES: tuple[tuple[str, PosClass], ...] = (
    ("ly", PosClass.ADV),
    ("ing", PosClass.VERB),
    ("ed", PosClass.VERB),
    ("ness", PosClass.NOUN),
    ("tion", PosClass.NOUN),
    ("ity", PosClass.NOUN),
    ("ous", PosClass.ADJ),
    ("ful", PosClass.ADJ),
    ("ive", PosClass.ADJ),
)

_LEXICON: dict[str, PosClass] | None = None


def _lexicon() -> dict[str, PosClass]:
    global _LEXICON
    if _LEXICON is None:
        table: dict[str, PosClass] = {}
        text = resources.files("dqkit").joinpath("data/pos_lexicon.txt").read_text("utf-8")
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, cls = line.split("\t")
            table[word] = PosClass(cls)
        _LEXICON = table
    return _LEXICON


def tokenize(text: str) -> list[str]:
    """Lowercase tokens; splits on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def tag_coarse(tokens: Sequence[str]) -> list[PosClass]:
    """One coarse class per token: lexicon lookup, then suffix rules, else OTHER."""
    lex = _lexicon()
    out = []
    for tok in tokens:
        cls = lex.get(tok)
        if cls is None:
            for suffix, sufcls in _SUFFIX_RULES:
                if len(tok) > len(suffix) and tok.endswith(suffix):
                    cls = sufcls
                    break
        out.append(cls if cls is not None else PosClass.OTHER)
    return out


def extract_ngrams(tokens: Sequence[str], n: int) -> Counter:
    """Multiset of in-order n-token windows; exactly max(0, len-n+1) of them."""
    if n < 1:
        raise InvalidOrder(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def jaccard(a: set, b: set) -> float:
    """|a & b| / |a | b|, with both-empty defined as 1.0."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


@dataclass
class PmiTable:
    """Label-conditioned pointwise mutual information over one granularity."""

    granularity: str
    alpha: float
    entries: dict[tuple[str, str], float]

    def get(self, feature: str, label: str) -> float | None:
        return self.entries.get((feature, label))

    def top_for_label(self, label: str, k: int = 5) -> list[tuple[str, float]]:
        scored = [(f, v) for (f, lab), v in self.entries.items() if lab == label]
        scored.sort(key=lambda fv: (-fv[1], fv[0]))
        return scored[:k]


GRANULARITIES = ("unigram", "bigram", "trigram", "pos")


def sample_features(sample_tokens: Sequence[str], granularity: str) -> set[str]:
    """Distinct features of one sample at the given granularity, as strings."""
    if granularity == "unigram":
        return set(sample_tokens)
    if granularity == "bigram":
        return {" ".join(g) for g in extract_ngrams(sample_tokens, 2)}
    if granularity == "trigram":
        return {" ".join(g) for g in extract_ngrams(sample_tokens, 3)}
    if granularity == "pos":
        return {c.value for c in tag_coarse(sample_tokens)}
    raise ValueError(f"unknown granularity {granularity!r}")


def presence_counts(
    d: Dataset, granularity: str
) -> tuple[dict[str, Counter], Counter, int]:
    """Per-label presence counts n(f,l), label counts n(l), and N."""
    joint: dict[str, Counter] = {}
    label_counts: Counter = Counter()
    for s in d.samples:
        toks = tokenize(s.text(d.schema.field_names))
        label_counts[s.label] += 1
        for f in sample_features(toks, granularity):
            joint.setdefault(f, Counter())[s.label] += 1
    return joint, label_counts, len(d)


def pmi_value(
    n_fl: float, n_f: float, n_l: float, n: int, n_labels: int, alpha: float
) -> float:
    """The smoothed PMI formula in bits; see the module docstring."""
    total = n + 2.0 * n_labels * alpha
    p_fl = (n_fl + alpha) / total
    p_f = (n_f + n_labels * alpha) / total
    p_l = (n_l + 2.0 * alpha) / total
    return math.log2(p_fl / (p_f * p_l))


def label_pmi(d: Dataset, granularity: str = "unigram", alpha: float = 0.0) -> PmiTable:
    """PMI of every (feature, observed label) pair; smoothed pairs only exist
    where the smoothed joint mass is positive."""
    if len(d) < 1:
        raise EmptyDataset("label_pmi needs at least one sample")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    joint, label_counts, n = presence_counts(d, granularity)
    n_labels = len(d.schema.labels)
    entries: dict[tuple[str, str], float] = {}
    labels = sorted(label_counts)
    for f, per_label in joint.items():
        n_f = sum(per_label.values())
        for lab in labels:
            n_fl = per_label.get(lab, 0)
            if n_fl + alpha <= 0:
                continue
            entries[(f, lab)] = pmi_value(n_fl, n_f, label_counts[lab], n, n_labels, alpha)
    return PmiTable(granularity=granularity, alpha=alpha, entries=entries)
