"""Synthetic datasets for experiments and verification.

``make_planted_dataset`` builds a corpus in which a known subset is both
linearly predictable from the features and harmful to corpus quality:

* planted samples are exact text duplicates (a few base texts copied many
  times) whose token length sits exactly at the corpus mean, so removing one
  raises both the type/token ratio and the length dispersion;
* every planted sample carries a give-away token tied to a single label;
* planted feature vectors point along one axis with almost no noise, so any
  linear probe that sees a few of them classifies the rest correctly;
* ordinary samples use globally unique vocabulary at two length levels
  straddling the mean, and pure-noise features.

The construction makes planted quality impacts strictly lower than every
ordinary sample's, so quality-ranked deletion removes them first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, Sample, TaskSchema
from .embeddings import EmbeddingMatrix, EmbManifest

NLI_SCHEMA = TaskSchema(
    name="nli",
    field_names=("premise", "hypothesis"),
    labels=frozenset({"entailment", "neutral", "contradiction"}),
)

_PLANTED_BASES = [
    ("the cat sat on the mat", "a cat rests {tok} there"),
    ("a dog ran in the park", "the dog plays {tok} outside"),
    ("the bird flew over trees", "a bird glides {tok} above"),
    ("a child read a book", "the child studies {tok} quietly"),
    ("the man cooked some rice", "a man eats {tok} food"),
    ("a woman drove the car", "the woman travels {tok} fast"),
    ("the boy kicked a ball", "a boy plays {tok} games"),
    ("a girl sang a song", "the girl hums {tok} tunes"),
    ("the horse pulled a cart", "a horse works {tok} hard"),
    ("a fish swam in water", "the fish moves {tok} around"),
]


@dataclass
class PlantedFixture:
    dataset: Dataset
    emb: EmbeddingMatrix
    manifest: EmbManifest
    planted_ids: set[str]
    giveaway: str
    planted_label: str


def make_planted_dataset(
    n: int = 2000,
    n_planted: int = 200,
    dim: int = 16,
    seed: int = 7,
    giveaway: str = "blicket",
    planted_label: str = "contradiction",
) -> PlantedFixture:
    if not (0 < n_planted < n):
        raise ValueError("need 0 < n_planted < n")
    n_normal = n - n_planted
    rng = np.random.default_rng(seed)
    labels = sorted(NLI_SCHEMA.labels)

    samples: list[Sample] = []
    planted_ids: set[str] = set()

    # ordinary samples: unique vocabulary, lengths 6 and 12 in equal halves
    half = n_normal // 2
    for i in range(n_normal):
        length = 6 if i < half else 12
        words = [f"w{i}x{j}" for j in range(length)]
        cut = length // 2
        label = labels[i % len(labels)]
        samples.append(Sample(
            id=f"n{i:05d}",
            fields={"premise": " ".join(words[:cut]), "hypothesis": " ".join(words[cut:])},
            label=label,
        ))

    # planted samples: exact duplicates of a few 9-token texts with the
    # give-away token, all under one label
    for i in range(n_planted):
        prem, hyp = _PLANTED_BASES[i % len(_PLANTED_BASES)]
        sid = f"p{i:05d}"
        planted_ids.add(sid)
        samples.append(Sample(
            id=sid,
            fields={"premise": prem, "hypothesis": hyp.format(tok=giveaway)},
            label=planted_label,
        ))

    order = rng.permutation(len(samples))
    samples = [samples[i] for i in order]
    dataset = Dataset(NLI_SCHEMA, samples)

    rows = rng.normal(0.0, 1.0, size=(len(samples), dim))
    for i, s in enumerate(dataset.samples):
        if s.id in planted_ids:
            rows[i] = rng.normal(0.0, 0.05, size=dim)
            rows[i, 0] += 4.0
    emb = EmbeddingMatrix(rows.astype(np.float32), dataset.ids())
    manifest = EmbManifest(order=dataset.ids(), burned=[],
                           source=f"synthetic planted fixture seed={seed}", dim=dim)
    return PlantedFixture(dataset=dataset, emb=emb, manifest=manifest,
                          planted_ids=planted_ids, giveaway=giveaway,
                          planted_label=planted_label)


def random_corpus(n: int, seed: int, n_labels: int = 3, with_splits: bool = False,
                  vocab_size: int = 120) -> Dataset:
    """Random small corpora for property tests: short texts over a shared
    vocabulary, uniform labels, optional train/dev split tags."""
    rng = np.random.default_rng(seed)
    labels = sorted(NLI_SCHEMA.labels)[:n_labels]
    vocab = [f"v{j}" for j in range(vocab_size)]
    samples = []
    for i in range(n):
        lp = int(rng.integers(2, 8))
        lh = int(rng.integers(2, 8))
        prem = " ".join(rng.choice(vocab, size=lp))
        hyp = " ".join(rng.choice(vocab, size=lh))
        split = None
        if with_splits:
            split = "train" if rng.random() < 0.7 else "dev"
        samples.append(Sample(
            id=f"r{i:05d}",
            fields={"premise": prem, "hypothesis": hyp},
            label=labels[int(rng.integers(0, len(labels)))],
            split=split,
        ))
    return Dataset(NLI_SCHEMA, samples)


def random_embeddings(d: Dataset, dim: int, seed: int) -> EmbeddingMatrix:
    rng = np.random.default_rng(seed)
    rows = rng.normal(0.0, 1.0, size=(len(d), dim)).astype(np.float32)
    return EmbeddingMatrix(rows, d.ids())


def giveaway_label_nmi(d: Dataset, token: str, bins_unused: int = 2) -> float:
    """Normalized MI between presence of ``token`` and the labels."""
    from .dqi import nmi_from_table
    from .textstats import tokenize

    labels = sorted({s.label for s in d.samples})
    lab_idx = {lab: j for j, lab in enumerate(labels)}
    table = np.zeros((2, len(labels)))
    for s in d.samples:
        present = int(token in tokenize(s.text(d.schema.field_names)))
        table[present, lab_idx[s.label]] += 1
    return nmi_from_table(table)
