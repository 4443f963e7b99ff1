"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, embeddings, evalharness, pruner
from .dqi import DqiConfig
from .errors import ConfigError, DqkitError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _load_schema_or_infer(args, dataset_path) -> corpus.TaskSchema:
    if getattr(args, "schema", None):
        return corpus.load_schema(args.schema)
    return corpus.infer_schema(dataset_path)


def _cmd_prune(args) -> int:
    try:
        cfg = pruner.PruneConfig.from_json(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.no_coarse:
            cfg.coarse_enabled = False
    except (OSError, ValueError, TypeError, KeyError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        schema = _load_schema_or_infer(args, args.dataset)
        d = corpus.load_dataset(args.dataset, schema)
        emb, manifest = embeddings.read_emb(args.embeddings)
        result = pruner.prune(d, emb, manifest, cfg)
        corpus.write_dataset(result.kept, args.out)
        if args.trace:
            result.trace.write_jsonl(args.trace)
    except DqkitError as e:
        print(f"data error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    print(f"kept {len(result.kept)} samples "
          f"({len(result.trace.iterations)} iterations, {result.trace.stop_reason})")
    return EXIT_OK


def _cmd_eval(args) -> int:
    try:
        ood_specs = []
        for spec in args.ood or []:
            if "=" not in spec:
                raise ConfigError(f"--ood expects name=path, got {spec!r}")
            name, _, path = spec.partition("=")
            ood_specs.append((name, path))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        schema = _load_schema_or_infer(args, args.train)
        train = corpus.load_dataset(args.train, schema)
        dev = corpus.load_dataset(args.dev, schema)
        ood = {name: corpus.load_dataset(path, schema) for name, path in ood_specs}
        mats = [embeddings.read_emb(p)[0] for p in args.embeddings]
        report = evalharness.evaluate(train, dev, ood, mats,
                                      train_name=Path(args.train).stem)
    except DqkitError as e:
        print(f"data error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    print(evalharness.render_table(report, args.format), end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import Service, build_app

    try:
        cfg = DqiConfig.from_json(args.config) if args.config else DqiConfig.bundled_default()
    except (OSError, ValueError, KeyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        seed = None
        if args.seed_dataset:
            schema = _load_schema_or_infer(args, args.seed_dataset)
            seed = corpus.load_dataset(args.seed_dataset, schema)
        service = Service(args.state, seed_dataset=seed, cfg=cfg)
    except DqkitError as e:
        print(f"data error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    uvicorn.run(build_app(service), host=args.host, port=args.port)
    return EXIT_OK


def _cmd_export_emb(args) -> int:
    from .export_emb import run_export

    return run_export(args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dqkit",
                                description="dataset quality pruning and creation tools")
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("prune", help="prune a dataset by predictability and quality")
    pp.add_argument("--dataset", required=True)
    pp.add_argument("--embeddings", required=True)
    pp.add_argument("--config", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--trace")
    pp.add_argument("--no-coarse", action="store_true")
    pp.add_argument("--seed", type=int)
    pp.add_argument("--schema")
    pp.set_defaults(fn=_cmd_prune)

    pe = sub.add_parser("eval", help="probe-based evaluation table")
    pe.add_argument("--train", required=True)
    pe.add_argument("--dev", required=True)
    pe.add_argument("--ood", action="append", metavar="NAME=PATH")
    pe.add_argument("--embeddings", nargs="+", required=True)
    pe.add_argument("--format", choices=("text", "markdown", "json"), default="text")
    pe.add_argument("--schema")
    pe.set_defaults(fn=_cmd_eval)

    ps = sub.add_parser("serve", help="run the creation-workflow service")
    ps.add_argument("--state", required=True)
    ps.add_argument("--seed-dataset")
    ps.add_argument("--config")
    ps.add_argument("--schema")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8080)
    ps.set_defaults(fn=_cmd_serve)

    px = sub.add_parser("export-emb", help="export feature vectors to an EMB1 file")
    from .export_emb import add_export_args

    add_export_args(px)
    px.set_defaults(fn=_cmd_export_emb)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
