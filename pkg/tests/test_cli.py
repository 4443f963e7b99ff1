import json

import pytest

from dqkit.cli import main
from dqkit.corpus import load_dataset, write_dataset
from dqkit.embeddings import EmbManifest, write_emb
from dqkit.synth import make_planted_dataset, random_corpus, random_embeddings


@pytest.fixture
def workdir(tmp_path):
    fx = make_planted_dataset(n=90, n_planted=12, dim=6, seed=1)
    data = tmp_path / "d.jsonl"
    emb = tmp_path / "d.emb"
    write_dataset(fx.dataset, data)
    write_emb(fx.emb, fx.manifest, emb)
    cfg = {
        "n": 40, "m": 2, "t": 0.2, "tau": 0.6, "k": 8, "seed": 5,
        "coarse_enabled": False,
        "probe": {"learning_rate": 0.2, "epochs": 15, "l2": 0.0001, "seed": 0},
    }
    cfg_path = tmp_path / "prune.json"
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    return tmp_path, data, emb, cfg_path, fx


def test_prune_cli_end_to_end(workdir, capsys):
    tmp_path, data, emb, cfg_path, fx = workdir
    out = tmp_path / "kept.jsonl"
    trace = tmp_path / "trace.jsonl"
    code = main(["prune", "--dataset", str(data), "--embeddings", str(emb),
                 "--config", str(cfg_path), "--out", str(out),
                 "--trace", str(trace)])
    assert code == 0
    kept = load_dataset(out, fx.dataset.schema)
    assert 0 < len(kept) < len(fx.dataset)
    lines = [json.loads(l) for l in trace.read_text("utf-8").splitlines()]
    assert lines[0]["record"] == "coarse"


def test_prune_cli_seed_and_no_coarse_flags(workdir):
    tmp_path, data, emb, cfg_path, fx = workdir
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out, seed in ((out1, "9"), (out2, "9")):
        code = main(["prune", "--dataset", str(data), "--embeddings", str(emb),
                     "--config", str(cfg_path), "--out", str(out),
                     "--no-coarse", "--seed", seed])
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_prune_cli_config_error(workdir):
    tmp_path, data, emb, _, _ = workdir
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": -3}', encoding="utf-8")
    code = main(["prune", "--dataset", str(data), "--embeddings", str(emb),
                 "--config", str(bad), "--out", str(tmp_path / "o.jsonl")])
    assert code == 2


def test_prune_cli_data_error(workdir):
    tmp_path, data, emb, cfg_path, fx = workdir
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"n": 5000, "coarse_enabled": False}), encoding="utf-8")
    code = main(["prune", "--dataset", str(data), "--embeddings", str(emb),
                 "--config", str(big), "--out", str(tmp_path / "o.jsonl")])
    assert code == 3


def test_eval_cli_markdown(tmp_path, capsys):
    train = random_corpus(30, seed=2)
    dev = random_corpus(12, seed=3)
    emb_train = random_embeddings(train, 5, seed=1)
    emb_dev = random_embeddings(dev, 5, seed=9)
    write_dataset(train, tmp_path / "train.jsonl")
    write_dataset(dev, tmp_path / "dev.jsonl")
    write_emb(emb_train, EmbManifest(order=train.ids(), burned=[], source="t", dim=5),
              tmp_path / "train.emb")
    write_emb(emb_dev, EmbManifest(order=dev.ids(), burned=[], source="t", dim=5),
              tmp_path / "dev.emb")
    code = main(["eval", "--train", str(tmp_path / "train.jsonl"),
                 "--dev", str(tmp_path / "dev.jsonl"),
                 "--ood", f"shift={tmp_path / 'dev.jsonl'}",
                 "--embeddings", str(tmp_path / "train.emb"), str(tmp_path / "dev.emb"),
                 "--format", "markdown"])
    assert code == 0
    out = capsys.readouterr().out
    assert "| Name | Size | IID | shift |" in out


def test_eval_cli_bad_ood_spec(tmp_path):
    code = main(["eval", "--train", "x.jsonl", "--dev", "y.jsonl",
                 "--ood", "no-equals-sign", "--embeddings", "z.emb"])
    assert code == 2


def test_serve_parser_accepts_documented_flags():
    from dqkit.cli import build_parser

    args = build_parser().parse_args(
        ["serve", "--state", "state-dir", "--seed-dataset", "seed.jsonl",
         "--config", "dqi.json", "--port", "8080"])
    assert args.state == "state-dir"
    assert args.port == 8080
    args = build_parser().parse_args(
        ["export-emb", "--dataset", "d.jsonl", "--burn", "0.1",
         "--seed", "7", "--out", "d.emb"])
    assert args.burn == 0.1
