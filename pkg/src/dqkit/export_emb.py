"""Offline exporter: dataset text -> EMB1 feature file plus burn manifest.

Two encoder families:

* ``hash`` (or ``hash:<dim>``): deterministic bag-of-words feature hashing.
  Always available, needs no model download, and is the encoder the test
  suite exercises.  Fine-tuning does not apply; the burn split is still
  selected and excluded so downstream behaves identically.
* any sentence-transformers model name: loaded lazily; when a burn fraction
  is set the encoder is first fine-tuned as a classifier on the burn split
  (mean-pooled hidden states + linear head).  Raises ``EncoderUnavailable``
  when the model cannot be loaded in this environment.

The burn split is chosen with ``corpus.split_dataset(dataset, burn, seed)``
(part_a burns); burned samples are never embedded, so they can never re-enter
a pruned set.  The manifest's ``source`` records the encoder and settings.
"""

from __future__ import annotations

import argparse
import hashlib
import sys

import numpy as np

from . import corpus
from .corpus import Dataset
from .embeddings import EmbeddingMatrix, EmbManifest, write_emb
from .errors import DqkitError, EncoderUnavailable
from .textstats import tokenize

DEFAULT_HASH_DIM = 256


def _hash_index(token: str, dim: int) -> int:
    digest = hashlib.sha1(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") % dim


def hash_encode(texts: list[str], dim: int = DEFAULT_HASH_DIM) -> np.ndarray:
    rows = np.zeros((len(texts), dim), dtype=np.float32)
    for i, text in enumerate(texts):
        for tok in tokenize(text):
            rows[i, _hash_index(tok, dim)] += 1.0
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    np.divide(rows, norms, out=rows, where=norms > 0)
    return rows


def _transformer_encode(texts: list[str], labels: list[str] | None,
                        encoder_name: str, fine_tune: bool,
                        burn_texts: list[str], burn_labels: list[str],
                        epochs: int, lr: float, seed: int) -> np.ndarray:
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except Exception as e:  # pragma: no cover - depends on optional extras
        raise EncoderUnavailable(f"transformers/torch not importable: {e}") from e
    try:
        tok = AutoTokenizer.from_pretrained(encoder_name)
        model = AutoModel.from_pretrained(encoder_name)
    except Exception as e:  # pragma: no cover - needs a model cache
        raise EncoderUnavailable(f"cannot load {encoder_name!r}: {e}") from e

    torch.manual_seed(seed)

    def embed(batch: list[str]) -> "torch.Tensor":
        enc = tok(batch, padding=True, truncation=True, max_length=128,
                  return_tensors="pt")
        out = model(**enc).last_hidden_state
        mask = enc["attention_mask"].unsqueeze(-1)
        return (out * mask).sum(1) / mask.sum(1).clamp(min=1)

    if fine_tune and burn_texts:
        label_order = sorted(set(burn_labels))
        head = torch.nn.Linear(model.config.hidden_size, len(label_order))
        opt = torch.optim.AdamW(list(model.parameters()) + list(head.parameters()), lr=lr)
        y = torch.tensor([label_order.index(l) for l in burn_labels])
        model.train()
        for _ in range(epochs):
            opt.zero_grad()
            logits = head(embed(burn_texts))
            loss = torch.nn.functional.cross_entropy(logits, y)
            loss.backward()
            opt.step()
        model.eval()

    with torch.no_grad():
        chunks = [embed(texts[i : i + 16]) for i in range(0, len(texts), 16)]
        return torch.cat(chunks).numpy().astype(np.float32)


def export(dataset_path: str, encoder_name: str, out_path: str,
           burn_fraction: float = 0.10, seed: int = 0,
           finetune_epochs: int = 2, finetune_lr: float = 1e-5) -> EmbManifest:
    if not (0.0 <= burn_fraction < 1.0):
        raise ValueError("burn fraction must lie in [0, 1)")
    schema = corpus.infer_schema(dataset_path)
    d = corpus.load_dataset(dataset_path, schema)

    if burn_fraction > 0.0:
        burn, rest = corpus.split_dataset(d, burn_fraction, seed)
    else:
        burn, rest = Dataset(d.schema, []), d

    sep = " "
    texts = [sep.join(s.fields[f] for f in schema.field_names) for s in rest.samples]
    burn_texts = [sep.join(s.fields[f] for f in schema.field_names) for s in burn.samples]

    if encoder_name == "hash" or encoder_name.startswith("hash:"):
        dim = int(encoder_name.split(":", 1)[1]) if ":" in encoder_name else DEFAULT_HASH_DIM
        rows = hash_encode(texts, dim)
        source = f"hash(dim={dim}), no fine-tune, burn={burn_fraction}, seed={seed}"
    else:
        rows = _transformer_encode(
            texts, rest.labels(), encoder_name, burn_fraction > 0.0,
            burn_texts, burn.labels(), finetune_epochs, finetune_lr, seed)
        source = (f"{encoder_name}, mean-pooled final hidden states, "
                  f"fine-tuned on burn={burn_fraction} ({finetune_epochs} epochs, "
                  f"lr={finetune_lr}), seed={seed}")

    m = EmbeddingMatrix(rows, rest.ids())
    manifest = EmbManifest(order=rest.ids(), burned=burn.ids(), source=source,
                           dim=m.dim)
    write_emb(m, manifest, out_path)
    return manifest


def add_export_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True)
    p.add_argument("--encoder", default="hash",
                   help="'hash[:dim]' or a sentence-encoder model name")
    p.add_argument("--burn", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--finetune-epochs", type=int, default=2)
    p.add_argument("--finetune-lr", type=float, default=1e-5)


def run_export(args) -> int:
    try:
        manifest = export(args.dataset, args.encoder, args.out,
                          burn_fraction=args.burn, seed=args.seed,
                          finetune_epochs=args.finetune_epochs,
                          finetune_lr=args.finetune_lr)
    except DqkitError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}: {len(manifest.order)} rows, dim {manifest.dim}, "
          f"{len(manifest.burned)} burned")
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="export-emb",
                                description="export dataset embeddings to EMB1")
    add_export_args(p)
    return run_export(p.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
