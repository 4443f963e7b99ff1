import json
import math

import numpy as np
import pytest

from dqkit.aflite import EnsembleConfig, run_ensemble
from dqkit.corpus import Dataset
from dqkit.dqi import DqiEngine
from dqkit.errors import CoarseDisabled, EmbeddingCoverageGap, TargetTooLarge
from dqkit.linmodels import TrainConfig
from dqkit.pruner import (
    COARSE_TAG,
    ITER_TAG,
    PruneConfig,
    coarse_select,
    derive_seed,
    prune,
)
from dqkit.synth import make_planted_dataset, random_corpus, random_embeddings

FAST_PROBE = TrainConfig(learning_rate=0.2, epochs=25, l2=1e-4, seed=0)


def _fixture(n=60, dim=6, seed=4):
    d = random_corpus(n, seed=seed)
    emb = random_embeddings(d, dim, seed=seed + 1)
    return d, emb


# --- coarse action -----------------------------------------------------------

def test_coarse_scripted_plateau_returns_last_improving():
    d, emb = _fixture(60)
    accs = iter([0.5, 0.7, 0.71, 0.712])
    calls = []

    def stub(Xt, yt, Xe, ye):
        calls.append(len(yt) + len(ye))
        return next(accs)

    cfg = PruneConfig(n=10, b=10, epsilon=0.002, seed=99, probe=FAST_PROBE)
    out = coarse_select(d, emb.rows, cfg, accuracy_fn=stub)
    assert calls == [10, 20, 30, 40]  # 4 steps ran, margin failed on the 4th
    # replay the same generator stream: the third draw is the returned subset
    rng = np.random.default_rng([99, COARSE_TAG])
    expected = None
    for size in (10, 20, 30):
        idx = np.sort(rng.choice(60, size=size, replace=False))
        rng.permutation(size)
        expected = idx
    expected_ids = {d.samples[i].id for i in expected}
    assert set(out.ids()) == expected_ids


def test_coarse_b_at_least_dataset_returns_everything():
    d, emb = _fixture(30)
    cfg = PruneConfig(n=5, b=500, seed=1, probe=FAST_PROBE)
    out = coarse_select(d, emb.rows, cfg)
    assert out.ids() == d.ids()


def test_coarse_default_b_is_full_size():
    d, emb = _fixture(24)
    cfg = PruneConfig(n=5, seed=2, probe=FAST_PROBE)
    out = coarse_select(d, emb.rows, cfg)
    assert out.ids() == d.ids()


def test_coarse_deterministic():
    d, emb = _fixture(40)
    cfg = PruneConfig(n=5, b=8, seed=3, probe=FAST_PROBE)
    a = coarse_select(d, emb.rows, cfg)
    b = coarse_select(d, emb.rows, cfg)
    assert a.ids() == b.ids()


def test_coarse_disabled_raises():
    d, emb = _fixture(20)
    cfg = PruneConfig(n=5, coarse_enabled=False, probe=FAST_PROBE)
    with pytest.raises(CoarseDisabled):
        coarse_select(d, emb.rows, cfg)


def test_coarse_percent_units():
    d, emb = _fixture(40)
    sizes = []

    def stub(Xt, yt, Xe, ye):
        sizes.append(len(yt) + len(ye))
        return 0.5  # first step improves, second fails

    cfg = PruneConfig(n=5, b=25, coarse_units="percent", seed=0, probe=FAST_PROBE)
    out = coarse_select(d, emb.rows, cfg, accuracy_fn=stub)
    assert sizes == [10, 20]  # 25% then 50% of 40
    assert len(out) == 10


# --- prune loop ---------------------------------------------------------------

def test_prune_unreachable_tau_keeps_everything():
    fx = make_planted_dataset(n=80, n_planted=10, dim=6, seed=5)
    cfg = PruneConfig(n=10, tau=1.0, m=2, probe=FAST_PROBE, seed=0,
                      coarse_enabled=False)
    res = prune(fx.dataset, fx.emb, fx.manifest, cfg)
    assert res.kept.ids() == fx.dataset.ids()
    assert res.trace.stop_reason == "empty_shortlist"
    assert all(not it.deleted_ids for it in res.trace.iterations)


def test_prune_stops_when_coarse_hits_target():
    d, emb = _fixture(50)
    from dqkit.embeddings import EmbManifest
    manifest = EmbManifest(order=d.ids(), burned=[], source="t", dim=emb.dim)

    def plateau_stub(Xt, yt, Xe, ye):
        return 0.5  # step 1 improves (no predecessor), step 2 fails the margin

    cfg = PruneConfig(n=20, b=20, seed=6, probe=FAST_PROBE)
    res = prune(d, emb, manifest, cfg, accuracy_fn=plateau_stub)
    assert len(res.kept) == 20  # coarse already reached n, loop never ran
    assert res.trace.iterations == []


def test_prune_burned_never_appear():
    fx = make_planted_dataset(n=120, n_planted=20, dim=6, seed=8)
    burned = fx.dataset.ids()[:15]
    from dqkit.embeddings import EmbManifest
    keep_ids = [i for i in fx.dataset.ids() if i not in set(burned)]
    manifest = EmbManifest(order=keep_ids, burned=burned, source="t", dim=fx.emb.dim)
    emb = fx.emb.take(keep_ids)
    cfg = PruneConfig(n=60, m=2, k=10, tau=0.6, probe=FAST_PROBE, seed=2,
                      coarse_enabled=False)
    res = prune(fx.dataset, emb, manifest, cfg)
    burned_set = set(burned)
    assert not burned_set & set(res.kept.ids())
    for it in res.trace.iterations:
        assert not burned_set & set(it.shortlist_ids)
        assert not burned_set & set(it.deleted_ids)


def test_prune_coverage_gap():
    d, emb = _fixture(20)
    from dqkit.embeddings import EmbManifest
    partial = emb.take(d.ids()[:15])
    manifest = EmbManifest(order=d.ids()[:15], burned=[], source="t", dim=emb.dim)
    with pytest.raises(EmbeddingCoverageGap):
        prune(d, partial, manifest, PruneConfig(n=5, probe=FAST_PROBE))


def test_prune_target_too_large():
    d, emb = _fixture(20)
    from dqkit.embeddings import EmbManifest
    manifest = EmbManifest(order=d.ids(), burned=[], source="t", dim=emb.dim)
    with pytest.raises(TargetTooLarge):
        prune(d, emb, manifest, PruneConfig(n=20, probe=FAST_PROBE))


def straight_line_prune(d: Dataset, emb, manifest, cfg: PruneConfig):
    """Independent reimplementation of the selection loop sharing the seed
    protocol; returns (kept_ids, deleted_sequence)."""
    working = [s for s in d.samples if s.id not in set(manifest.burned)]

    if cfg.coarse_enabled:
        n = len(working)
        rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, COARSE_TAG])
        b = cfg.b if cfg.b is not None else n
        ids_now = [s.id for s in working]
        feats = emb.take(ids_now).rows.astype(np.float64)
        labels = [s.label for s in working]
        prev_idx, prev_acc = None, None
        a = b
        while True:
            size = min(n, a)
            idx = np.sort(rng.choice(n, size=size, replace=False))
            acc = 0.0
            if size >= 2:
                perm = rng.permutation(size)
                half = size // 2
                tr, ev = idx[perm[:half]], idx[perm[half:]]
                from dqkit.linmodels import accuracy, train_logreg, train_svm
                accs = []
                if len(set(labels[i] for i in tr)) >= 2 and len(ev):
                    for fn in (train_logreg, train_svm):
                        model = fn(feats[tr], [labels[i] for i in tr], cfg.probe)
                        accs.append(accuracy(model, feats[ev], [labels[i] for i in ev]))
                    acc = float(sum(accs) / len(accs))
            improving = prev_acc is None or acc > prev_acc + cfg.epsilon
            if not improving:
                chosen = prev_idx
                break
            prev_idx, prev_acc = idx, acc
            if size >= n:
                chosen = idx
                break
            a += b
        keep = {working[i].id for i in chosen}
        working = [s for s in working if s.id in keep]

    deleted_seq = []
    iteration = 0
    while len(working) > cfg.n:
        ids = [s.id for s in working]
        labels = [s.label for s in working]
        X = emb.take(ids).rows.astype(np.float64)
        t_abs = min(max(1, int(math.floor(cfg.t * len(working)))), len(working) - 1)
        seed_it = derive_seed(cfg.seed, ITER_TAG, iteration)
        ledger = run_ensemble(X, labels, ids,
                              EnsembleConfig(m=cfg.m, t=t_abs, seed=seed_it,
                                             probe=cfg.probe))
        shortlist = [sid for sid in ids
                     if ledger.evals[sid] > 0
                     and ledger.correct[sid] / ledger.evals[sid] > cfg.tau]
        if not shortlist:
            break
        working_ds = Dataset(d.schema, list(working))
        engine = DqiEngine(working_ds, emb.take(ids), cfg.dqi)

        def composite(sid):
            iv = engine.impact(sid, components=cfg.dqi.sort_components)
            total, weight = 0.0, 0.0
            for c in cfg.dqi.sort_components:
                v = iv.get(c)
                if v is not None:
                    w = cfg.dqi.weights.get(c, 1.0)
                    total += w * v
                    weight += w
            return total / weight

        ranked = sorted(shortlist, key=lambda sid: (composite(sid), sid))
        batch = ranked[: min(cfg.k, len(ranked))]
        deleted_seq.extend(batch)
        gone = set(batch)
        working = [s for s in working if s.id not in gone]
        iteration += 1
        if len(working) <= cfg.n or len(shortlist) < cfg.k:
            break
    return [s.id for s in working], deleted_seq


def test_prune_matches_straight_line_oracle():
    fx = make_planted_dataset(n=260, n_planted=30, dim=8, seed=3)
    cfg = PruneConfig(n=150, b=100, m=2, t=0.15, tau=0.75, k=25, seed=17,
                      probe=TrainConfig(learning_rate=0.2, epochs=40, l2=1e-4, seed=0))
    res = prune(fx.dataset, fx.emb, fx.manifest, cfg)
    kept_oracle, deleted_oracle = straight_line_prune(fx.dataset, fx.emb, fx.manifest, cfg)
    got_deleted = [sid for it in res.trace.iterations for sid in it.deleted_ids]
    assert res.kept.ids() == kept_oracle
    assert got_deleted == deleted_oracle
    # planted ids dominate the front of the deletion order
    first_normal = next((i for i, sid in enumerate(got_deleted)
                         if sid not in fx.planted_ids), len(got_deleted))
    assert first_normal >= 0.9 * len(fx.planted_ids & set(got_deleted))


def test_prune_trace_invariants_random_configs():
    rng = np.random.default_rng(0)
    for trial in range(6):
        n_total = int(rng.integers(36, 70))
        d = random_corpus(n_total, seed=100 + trial)
        emb = random_embeddings(d, 5, seed=trial)
        from dqkit.embeddings import EmbManifest
        manifest = EmbManifest(order=d.ids(), burned=[], source="t", dim=5)
        cfg = PruneConfig(
            n=int(rng.integers(5, n_total - 10)),
            m=int(rng.integers(1, 4)),
            t=float(rng.uniform(0.1, 0.5)),
            tau=float(rng.uniform(0.3, 0.9)),
            k=int(rng.integers(1, 12)),
            seed=trial,
            probe=TrainConfig(epochs=8),
            coarse_enabled=bool(rng.integers(0, 2)),
        )
        res = prune(d, emb, manifest, cfg)
        size = res.trace.coarse_selected if cfg.coarse_enabled else n_total
        for it in res.trace.iterations:
            assert it.size_before == size
            assert set(it.deleted_ids) <= set(it.shortlist_ids)
            assert len(it.deleted_ids) == min(cfg.k, it.shortlist_size)
            assert it.p_min > cfg.tau
            size = size - len(it.deleted_ids)
        assert size == len(res.kept)
        assert res.trace.stop_reason


def test_deletions_are_lowest_quality_within_iteration():
    # within one iteration, every deleted id ranks at or below every retained
    # shortlist member on composite quality impact
    fx = make_planted_dataset(n=200, n_planted=30, dim=6, seed=6)
    cfg = PruneConfig(n=120, m=2, k=10, tau=0.7, probe=FAST_PROBE, seed=4,
                      coarse_enabled=False)
    res = prune(fx.dataset, fx.emb, fx.manifest, cfg)
    assert res.trace.iterations
    deleted_so_far: list[str] = []
    for it in res.trace.iterations:
        current = fx.dataset.without(deleted_so_far)
        engine = DqiEngine(current, fx.emb.take(current.ids()), cfg.dqi)
        from dqkit.dqi import composite_dqi
        comp = {sid: composite_dqi(engine.impact(sid, components=cfg.dqi.sort_components),
                                   cfg.dqi)
                for sid in it.shortlist_ids}
        retained = set(it.shortlist_ids) - set(it.deleted_ids)
        if retained and it.deleted_ids:
            assert max(comp[d] for d in it.deleted_ids) <= \
                min(comp[r] for r in retained) + 1e-12
        deleted_so_far.extend(it.deleted_ids)


def test_trace_jsonl_round_trip(tmp_path):
    fx = make_planted_dataset(n=80, n_planted=10, dim=5, seed=2)
    cfg = PruneConfig(n=30, m=1, k=5, tau=0.5, probe=FAST_PROBE, seed=1,
                      coarse_enabled=False)
    res = prune(fx.dataset, fx.emb, fx.manifest, cfg)
    path = tmp_path / "trace.jsonl"
    res.trace.write_jsonl(path)
    lines = [json.loads(l) for l in path.read_text(encoding="utf-8").splitlines()]
    assert lines[0]["record"] == "coarse"
    rest = lines[1:]
    assert len(rest) == len(res.trace.iterations)
    assert all(r["record"] == "iteration" for r in rest)


def test_derive_seed_stable():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    assert derive_seed(5, 1, 2) != derive_seed(5, 1, 3)


def test_prune_config_from_dict():
    cfg = PruneConfig.from_dict({
        "n": 10, "k": 3, "tau": 0.6,
        "dqi": {"sort_components": ["c1", "c3"]},
        "probe": {"learning_rate": 0.2, "epochs": 10, "l2": 0.0, "seed": 1},
    })
    assert cfg.k == 3
    assert cfg.dqi.sort_components == ("c1", "c3")
    assert cfg.probe.epochs == 10
