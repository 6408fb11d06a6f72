import re
import subprocess
import sys

import pytest

from rotprobe import cli
from rotprobe.config import ConfigError, load_config, parse_kv
from rotprobe.probing import read_results

ARTIFACTS = [
    cli.CHECKPOINT, cli.TRAIN_LOG, cli.ACCURACY, cli.ACCURACY_TABLE, cli.DUMP,
    cli.LABELS, cli.LABEL_COUNTS, cli.LABEL_TABLES, cli.RESULTS, cli.COMBINED,
]


def small_config(tmp_path, demo_dir, name="run", **extra):
    kv = {
        "train_xml": demo_dir / "train.xml",
        "test_xml": demo_dir / "test.xml",
        "embeddings": demo_dir / "embeddings.txt",
        "annotations": demo_dir / "annotations.tsv",
        "lexicon": demo_dir / "lexicon.tsv",
        "ontology": demo_dir / "ontology.tsv",
        "output_dir": tmp_path / name,
        "seed": 3,
        "hops": 2,
        "hidden": 4,
        "epochs": 2,
        "batch_size": 5,
        "probe_runs": 2,
        "probe_tasks": "Relation,POS",
    }
    kv.update(extra)
    path = tmp_path / f"{name}.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in kv.items() if v is not None))
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, demo_dir):
    tmp = tmp_path_factory.mktemp("cli")
    outs = []
    for name in ("a", "b"):
        cfg = small_config(tmp, demo_dir, name=name, output_dir=tmp / "out" / name)
        assert cli.main(["all", "--config", str(cfg)]) == 0
        outs.append(tmp / "out" / name)
    return outs


def test_all_writes_every_artifact(pipeline):
    out = pipeline[0]
    for name in ARTIFACTS:
        assert (out / name).is_file(), name
    assert sorted(p.name for p in (out / "figures").iterdir()) == [
        f"figure_{t}_{p}.svg" for t in ("POS", "Relation") for p in ("correct", "incorrect")
    ]


def test_reruns_are_byte_identical(pipeline):
    a, b = pipeline
    for name in ARTIFACTS:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    for fig in (a / "figures").iterdir():
        assert fig.read_bytes() == (b / "figures" / fig.name).read_bytes()


def test_figure_ticks_and_error_bars(pipeline):
    out = pipeline[0]
    rows = read_results(out / cli.RESULTS)
    svg = (out / "figures" / "figure_Relation_correct.svg").read_text()
    assert svg.count('class="xtick"') == 2 + 2
    rows = {(r["layer"], r["partition"], r["class"]): r for r in rows if r["task"] == "Relation"}
    series = {"overall (test)": ("correct", "overall"), "overall (train)": ("train_subset", "overall")}
    groups = re.findall(r'<g class="series" data-label="([^"]+)">(.*?)</g>', svg, re.S)
    assert len(groups) == 2 + 2
    checked = 0
    for label, body in groups:
        part, cls = series.get(label, ("correct", label))
        for layer, mean, std in re.findall(r'data-layer="([^"]+)" data-mean="([^"]+)" data-std="([^"]+)"', body):
            row = rows[(layer, part, cls)]
            assert (float(mean), float(std)) == (row["mean_acc"], row["std_acc"])
            checked += 1
    assert checked >= 4


def test_training_log_and_accuracy_table(pipeline):
    log = (pipeline[0] / cli.TRAIN_LOG).read_text().splitlines()
    assert log[0] == "epoch,mean_loss,train_acc" and len(log) == 3
    table = (pipeline[0] / cli.ACCURACY_TABLE).read_text()
    assert "Overall" in table and "27" in table and "10" in table


def test_seed_override_changes_checkpoint(tmp_path, demo_dir):
    cfg = small_config(tmp_path, demo_dir)
    assert cli.main(["train", "--config", str(cfg)]) == 0
    first = (tmp_path / "run" / cli.CHECKPOINT).read_bytes()
    assert cli.main(["train", "--config", str(cfg), "--seed", "4"]) == 0
    assert (tmp_path / "run" / cli.CHECKPOINT).read_bytes() != first


def test_stage_order_is_enforced(tmp_path, demo_dir, capsys):
    cfg = small_config(tmp_path, demo_dir)
    assert cli.main(["probe", "--config", str(cfg)]) == 2
    assert "run the earlier stage first" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra,needle",
    [
        ({"seed": None}, "'seed' is required"),
        ({"seed": "abc"}, "seed must be an integer"),
        ({"embeddings": "missing.txt"}, "missing file"),
        ({"hops": 0}, "hops"),
    ],
)
def test_config_errors_exit_nonzero(tmp_path, demo_dir, capsys, extra, needle):
    cfg = small_config(tmp_path, demo_dir, **extra)
    assert cli.main(["train", "--config", str(cfg)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["train", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert "not found" in capsys.readouterr().err


def test_parse_kv():
    assert parse_kv("# c\na = 1\n\nb= x y # tail\n") == {"a": "1", "b": "x y"}
    with pytest.raises(ConfigError, match=":2:"):
        parse_kv("a = 1\nbroken\n")


def test_relative_paths_resolve_against_config(tmp_path, demo_dir):
    for name in ("train.xml", "test.xml", "embeddings.txt"):
        (tmp_path / name).write_bytes((demo_dir / name).read_bytes())
    (tmp_path / "c.cfg").write_text("train_xml = train.xml\ntest_xml = test.xml\nembeddings = embeddings.txt\nseed = 1\n")
    cfg = load_config(tmp_path / "c.cfg", {"hops": 4})
    assert cfg.paths["train_xml"] == tmp_path / "train.xml"
    assert cfg.hp.hops == 4 and cfg.seed == 1 and cfg.hp.seed == 1


def test_demo_config_loads():
    cfg = load_config("demo")
    assert cfg.seed == 7 and cfg.hp.hops == 10 and cfg.probe_runs == 10


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rotprobe", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "train" in res.stdout
