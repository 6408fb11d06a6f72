"""The ten acceptance criteria, one marked group each.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL/SKIP line per criterion. Parts that need the official SemEval-2016
restaurant files and GloVe vectors read ``ROTPROBE_FULL_CONFIG``, a run config
whose paths point at those files; without it they are skipped.
"""

import os
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pytest

from fd import numeric_grad, rel_error
from rotprobe import cli, corpus, extraction, labeling, model, probing
from rotprobe import numerics as nx
from rotprobe.config import load_config
from rotprobe.numerics import Parameter, Tape, Tensor

FULL_CONFIG = os.environ.get("ROTPROBE_FULL_CONFIG")
needs_full = pytest.mark.skipif(not FULL_CONFIG, reason="set ROTPROBE_FULL_CONFIG to a config for the official data")


def criterion(n, title):
    return pytest.mark.criterion(n, title)


@pytest.fixture(scope="module")
def full_cfg():
    cfg = load_config(FULL_CONFIG)
    if "annotations" not in cfg.paths:
        pytest.skip("the full-data config has no annotations file")
    return cfg


@pytest.fixture(scope="module")
def demo_cfg(tmp_path_factory):
    return load_config("demo", {"output_dir": str(tmp_path_factory.mktemp("demo"))})


@pytest.fixture(scope="module")
def demo_run(demo_cfg, demo_train, demo_table):
    return model.train(demo_train, demo_table, demo_cfg.hp)


# ---------------------------------------------------------------- 1


def _op_error(build, *arrays):
    leaves = [Parameter(a.copy()) for a in arrays]
    w = np.random.default_rng(0).normal(size=build(*[Tensor(p.data) for p in leaves]).shape)

    def f():
        return float(np.sum(w * build(*[Tensor(p.data) for p in leaves]).data))

    with Tape() as tape:
        out = build(*leaves)
        loss = nx.total(nx.mul(out, Tensor(w))) if out.shape else nx.mul(out, Tensor(w))
    tape.backward(loss)
    return max(rel_error(p.gradient, numeric_grad(f, p.data)) for p in leaves)


def _r(*shape, seed=0):
    return np.random.default_rng(seed + 17).normal(size=shape)


def _fixed_dropout(x):
    return nx.dropout(x, 0.5, True, np.random.default_rng(42))


OPS = {
    "matmul": (nx.matmul, [_r(3, 4), _r(4, 2, seed=1)]),
    "matvec": (nx.matmul, [_r(3, 4), _r(4, seed=1)]),
    "add": (nx.add, [_r(3, 4), _r(4, seed=1)]),
    "mul": (nx.mul, [_r(5), _r(5, seed=1)]),
    "scale": (lambda a: nx.scale(a, 0.3), [_r(4)]),
    "total": (nx.total, [_r(2, 3)]),
    "tanh": (nx.tanh, [_r(6)]),
    "sigmoid": (nx.sigmoid, [_r(6)]),
    "relu": (nx.relu, [_r(6) + np.sign(_r(6)) * 0.1]),
    "softmax": (nx.softmax, [_r(5)]),
    "cross_entropy": (lambda a: nx.cross_entropy(a, 1), [_r(3)]),
    "l2_penalty": (lambda a, b: nx.l2_penalty([a, b], 0.01), [_r(3, 2), _r(4, seed=1)]),
    "cross_entropy_l2": (lambda a, b: nx.cross_entropy_l2(a, 2, [b], 0.1), [_r(3), _r(2, 2, seed=1)]),
    "softmax_cross_entropy_rows": (lambda a: nx.softmax_cross_entropy_rows(a, np.array([0, 2, 1])), [_r(3, 3)]),
    "concat": (lambda a, b: nx.concat([a, b]), [_r(3), _r(2, seed=1)]),
    "stack": (lambda a, b: nx.stack([a, b]), [_r(3), _r(3, seed=1)]),
    "row": (lambda a: nx.row(a, 2), [_r(3, 4)]),
    "hstack": (nx.hstack, [_r(3, 2), _r(3, 4, seed=1)]),
    "mean_rows": (nx.mean_rows, [_r(4, 3)]),
    "mean_pool": (lambda a, b: nx.mean_pool([a, b]), [_r(3), _r(3, seed=1)]),
    "dropout": (_fixed_dropout, [_r(8)]),
    "lstm_sequence": (nx.lstm_sequence, [_r(4, 3), _r(8, 3, seed=1) * 0.5, _r(8, 2, seed=2) * 0.5, _r(8, seed=3) * 0.1]),
}


@criterion(1, "gradient fidelity: per-op < 1e-4, tiny model end-to-end < 1e-3")
@pytest.mark.parametrize("name", sorted(OPS))
def test_c1_per_op_gradients(name):
    build, arrays = OPS[name]
    assert _op_error(build, *arrays) < 1e-4


@criterion(1, "gradient fidelity: per-op < 1e-4, tiny model end-to-end < 1e-3")
def test_c1_tiny_model_gradients():
    hp = model.HyperParams(hops=2, hidden=4, embedding_dim=6, l2=1e-3, seed=5)
    net = model.LcrRotHop(hp)
    rng = np.random.default_rng(8)
    emb = {p: rng.normal(size=(2, 6)) for p in model.PARTS}

    def f():
        return model.batch_loss(net, [(emb, 1)], None, training=False)[0].item()

    with Tape() as tape:
        loss, _ = model.batch_loss(net, [(emb, 1)], None, training=False)
    tape.backward(loss)
    errors = {k: rel_error(p.gradient, numeric_grad(f, p.data)) for k, p in net.params.items()}
    assert max(errors.values()) < 1e-3, errors


# ---------------------------------------------------------------- 2

DEMO_COUNTS = {"train": (27, [14, 3, 10]), "test": (10, [5, 1, 4])}
OFFICIAL_COUNTS = {"train": (1879, [1319, 72, 488]), "test": (650, [483, 32, 135])}


@criterion(2, "corpus fidelity: exact instance and class counts")
def test_c2_demo_corpus_counts(demo_train, demo_test):
    for split, insts in (("train", demo_train), ("test", demo_test)):
        assert (len(insts), corpus.class_counts(insts)) == DEMO_COUNTS[split]


@criterion(2, "corpus fidelity: exact instance and class counts")
@needs_full
def test_c2_official_corpus_counts(full_cfg):
    ann = corpus.read_annotations(full_cfg.paths["annotations"])
    for split in ("train", "test"):
        insts = corpus.build_instances(corpus.parse_semeval(full_cfg.paths[f"{split}_xml"]), ann)
        assert (len(insts), corpus.class_counts(insts)) == OFFICIAL_COUNTS[split]


# ---------------------------------------------------------------- 3


@criterion(3, "full-data test accuracy within 86.0 +- 5 points")
@needs_full
@pytest.mark.fulldata
@pytest.mark.slow
def test_c3_full_accuracy(full_cfg):
    reference = asdict(model.HyperParams(seed=full_cfg.seed, embedding_dim=full_cfg.hp.embedding_dim))
    if asdict(full_cfg.hp) != reference:
        pytest.skip("the full-data config must use the published hyperparameters")
    train, test = cli._instances(full_cfg)
    table = cli._table(full_cfg, train + test)
    ckpt = full_cfg.output_dir / cli.CHECKPOINT
    if ckpt.exists() and asdict(model.load_checkpoint(ckpt)[0]) == reference:
        net = model.LcrRotHop.load(ckpt)
    else:
        net, _ = model.train(train, table, full_cfg.hp)
        full_cfg.output_dir.mkdir(parents=True, exist_ok=True)
        net.save(ckpt)
    acc = model.evaluate(net, test, table).overall
    assert abs(acc - 0.860) <= 0.05, acc


# ---------------------------------------------------------------- 4


@criterion(4, "demo smoke: >= 90% train accuracy after 30 epochs, loss falls over the first 10")
def test_c4_demo_training(demo_cfg, demo_run, demo_train, demo_table):
    net, history = demo_run
    assert demo_cfg.hp.epochs == 30
    losses = [h.mean_loss for h in history[:10]]
    assert all(b < a for a, b in zip(losses, losses[1:])), losses
    assert model.evaluate(net, demo_train, demo_table).overall >= 0.90


# ---------------------------------------------------------------- 5


@criterion(5, "extraction: per-hop word sums equal side representations; 2+n layers per context word")
def test_c5_extraction_consistency(demo_run, demo_train, demo_test, demo_table):
    net, _ = demo_run
    n, d = net.hp.hops, net.hp.hidden
    for inst in demo_train + demo_test:
        trace = net.forward(model.embed_instance(inst, demo_table))
        for side in ("left", "right"):
            reps = extraction.word_context_reps(trace, side)
            for j, hop in enumerate(trace.hops):
                total = sum((r[j] for r in reps), np.zeros(2 * d))
                assert np.max(np.abs(total - getattr(hop, f"r_{side}"))) <= 1e-9
    dump = extraction.extract(net, {"train": demo_train, "test": demo_test}, demo_table)
    for rec in dump.records:
        names = extraction.layer_names(n) if rec.part != "target" else ["e", "h"]
        assert list(rec.layers) == names
        assert rec.layers["e"].shape == (net.hp.embedding_dim,)
        assert all(rec.layers[k].shape == (2 * d,) for k in names[1:])
    assert len(extraction.layer_names(10)) == 12


# ---------------------------------------------------------------- 6


def _reference_draws(q):
    big = max(range(len(q)), key=lambda k: (q[k], -k))
    rest = [c for k, c in enumerate(q) if k != big and c > 0]
    mean = sum(rest) // len(rest)
    return tuple(min(c, mean) for c in q)


@criterion(6, "sampling oracle")
@pytest.mark.parametrize("counts,draws", [([100, 200, 700], (100, 150, 150)), ([6220, 22864], (6220, 6220))])
def test_c6_sampling(counts, draws):
    assert probing.plan_sample(counts).draws == draws == _reference_draws(counts)


# ---------------------------------------------------------------- 7


@criterion(7, "probe sanity: separable data fitted, shuffled labels at chance")
def test_c7_probe_sanity():
    rng = np.random.default_rng(0)
    centres = rng.normal(size=(3, 300))
    y = np.arange(120) % 3
    X = centres[y] + rng.normal(size=(120, 300)) * 0.2
    clf = probing.train_probe(X, y, 3, 90, 0, "separable")
    assert probing.evaluate_probe(clf, X, y).overall == 1.0

    Xs, ys = rng.normal(size=(300, 300)), rng.permutation(np.arange(300) % 3)
    Xt, yt = rng.normal(size=(3000, 300)), rng.permutation(np.arange(3000) % 3)
    accs = [probing.evaluate_probe(probing.train_probe(Xs, ys, 3, 90, 0, "shuffled", k), Xt, yt).overall for k in range(3)]
    assert abs(np.mean(accs) - 1 / 3) <= 0.05


# ---------------------------------------------------------------- 8


def _overall(rows, task, layer):
    vals = [r["mean_acc"] for r in rows if (r["task"], r["layer"], r["partition"], r["class"]) == (task, layer, "correct", "overall")]
    assert len(vals) == 1, (task, layer)
    return vals[0]


@criterion(8, "layer ordering on the full-data probe results")
@needs_full
@pytest.mark.fulldata
def test_c8_layer_ordering(full_cfg):
    path = full_cfg.output_dir / cli.RESULTS
    if not path.exists():
        pytest.skip(f"no full-data probe results at {path}; run `rotprobe all` with the full config first")
    rows = probing.read_results(path)
    rs = [f"r_{j}" for j in range(1, full_cfg.hp.hops + 1)]
    pos_e = _overall(rows, "POS", "e")
    assert all(pos_e > _overall(rows, "POS", r) for r in rs)
    rel = [_overall(rows, "Relation", r) for r in rs]
    assert all(v > _overall(rows, "Relation", "e") for v in rel)
    assert max(rel) - min(rel) < 0.10


# ---------------------------------------------------------------- 9

# correct + incorrect test rows of the published word-count tables
OFFICIAL_TEST_TOTALS = {
    "POS": [1211 + 278, 1099 + 182, 569 + 129, 2338 + 264, 4848 + 908],
    "Relation": [2070 + 364, 7995 + 1397],
    "Sentiment": [1677 + 264, 489 + 120, 7899 + 1377],
    "AspectSentiment": [450 + 57, 91 + 38, 9524 + 1666],
}


def _test_totals(instances, lexicon, links):
    labels = labeling.label_all(instances, lexicon, links)
    return {task: [sum(lab.get(task) == c for lab in labels) for c in classes] for task, classes in labeling.TASKS.items()}


@criterion(9, "labeling totals: demo golden exact, official within 5%")
def test_c9_demo_golden(demo_dir):
    import json

    golden = json.loads((Path(__file__).parent / "golden" / "demo_label_totals.json").read_text())["fallback"]
    insts = corpus.build_instances(corpus.parse_semeval(demo_dir / "test.xml"))
    got = _test_totals(insts, labeling.SentimentLexicon.load(demo_dir / "lexicon.tsv"), labeling.load_ontology_links(demo_dir / "ontology.tsv"))
    assert {t: dict(zip(labeling.TASKS[t], v)) for t, v in got.items()} == {t: golden[t] for t in labeling.TASKS}


@criterion(9, "labeling totals: demo golden exact, official within 5%")
@needs_full
@pytest.mark.fulldata
def test_c9_official_totals(full_cfg):
    if "lexicon" not in full_cfg.paths or "ontology" not in full_cfg.paths:
        pytest.skip("the full-data config needs lexicon and ontology files")
    _, test = cli._instances(full_cfg)
    got = _test_totals(test, labeling.SentimentLexicon.load(full_cfg.paths["lexicon"]), labeling.load_ontology_links(full_cfg.paths["ontology"]))
    for task, expected in OFFICIAL_TEST_TOTALS.items():
        for g, e in zip(got[task], expected):
            assert abs(g - e) <= 0.05 * e, (task, got[task], expected)


# ---------------------------------------------------------------- 10


@criterion(10, "determinism: every stage re-run gives bit-identical artifacts")
@pytest.mark.slow
def test_c10_determinism(tmp_path):
    outs = [tmp_path / "first", tmp_path / "second"]
    for out in outs:
        for stage in cli.COMMANDS:
            assert cli.main([stage, "--config", "demo", "--output", str(out)]) == 0
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    assert len(files) >= 10
    assert files == sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    for rel in files:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
