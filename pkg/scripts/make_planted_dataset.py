#!/usr/bin/env python3
"""Generate the planted-bias benchmark fixture to disk.

Writes <out>.jsonl, <out>.emb (+ manifest) and <out>.planted.json listing the
planted sample ids, so pruning runs can be scored afterwards.
"""

import argparse
import json
from pathlib import Path

from dqkit.corpus import write_dataset
from dqkit.embeddings import write_emb
from dqkit.synth import make_planted_dataset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--planted", type=int, default=200)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="planted", help="output path prefix")
    args = ap.parse_args()

    fx = make_planted_dataset(n=args.n, n_planted=args.planted, dim=args.dim,
                              seed=args.seed)
    out = Path(args.out)
    write_dataset(fx.dataset, out.with_suffix(".jsonl"))
    write_emb(fx.emb, fx.manifest, out.with_suffix(".emb"))
    out.with_suffix(".planted.json").write_text(
        json.dumps({"planted_ids": sorted(fx.planted_ids),
                    "giveaway": fx.giveaway,
                    "planted_label": fx.planted_label}, indent=2) + "\n",
        encoding="utf-8")
    print(f"wrote {out}.jsonl / {out}.emb / {out}.planted.json "
          f"({args.n} samples, {args.planted} planted)")


if __name__ == "__main__":
    main()
