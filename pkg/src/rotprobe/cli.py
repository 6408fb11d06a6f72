"""Command-line pipeline: train, extract, label, probe, report."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import corpus, extraction, labeling, model, probing, report
from .config import ConfigError, RunConfig, load_config

logger = logging.getLogger("rotprobe")

CHECKPOINT = "checkpoint.bin"
TRAIN_LOG = "training_log.csv"
ACCURACY = "accuracy.csv"
ACCURACY_TABLE = "accuracy_table.txt"
DUMP = "representations.dump"
LABELS = "labels.csv"
LABEL_COUNTS = "label_counts.csv"
LABEL_TABLES = "label_tables.txt"
RESULTS = "probe_results.csv"
COMBINED = "report.csv"
FIGURES = "figures"


class StageError(RuntimeError):
    pass


def _require(cfg: RunConfig, name: str, stage: str) -> Path:
    p = cfg.output_dir / name
    if not p.exists():
        raise StageError(f"{stage} needs {p}; run the earlier stage first")
    return p


def _instances(cfg: RunConfig):
    ann = cfg.paths.get("annotations")
    annotations = corpus.read_annotations(ann) if ann else None
    train = corpus.build_instances(corpus.parse_semeval(cfg.paths["train_xml"]), annotations)
    test = corpus.build_instances(corpus.parse_semeval(cfg.paths["test_xml"]), annotations)
    return train, test


def _table(cfg: RunConfig, instances) -> corpus.EmbeddingTable:
    vocab = {corpus.EmbeddingTable.key(t) for inst in instances for t in inst.tokens}
    return corpus.EmbeddingTable.load(cfg.paths["embeddings"], dim=cfg.hp.embedding_dim, seed=cfg.seed, vocab=vocab)


def _write_accuracy_csv(path: Path, train: model.AccuracyReport, test: model.AccuracyReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["split", "class", "freq", "accuracy"])
        for split, rep in (("train", train), ("test", test)):
            for name, f, a in zip(corpus.POLARITIES, rep.freq, rep.per_class):
                w.writerow([split, name, f, "" if a is None else repr(a)])
            w.writerow([split, "overall", rep.total, repr(rep.overall)])


def cmd_train(cfg: RunConfig) -> None:
    train, test = _instances(cfg)
    table = _table(cfg, train + test)
    logger.info("training on %d opinions (test %d), hops=%d d=%d", len(train), len(test), cfg.hp.hops, cfg.hp.hidden)
    net, history = model.train(train, table, cfg.hp)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    net.save(cfg.output_dir / CHECKPOINT)
    model.write_training_log(cfg.output_dir / TRAIN_LOG, history)
    tr, te = model.evaluate(net, train, table), model.evaluate(net, test, table)
    _write_accuracy_csv(cfg.output_dir / ACCURACY, tr, te)
    text = model.format_accuracy_table(tr, te)
    (cfg.output_dir / ACCURACY_TABLE).write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_extract(cfg: RunConfig) -> None:
    ckpt = _require(cfg, CHECKPOINT, "extract")
    net = model.LcrRotHop.load(ckpt)
    train, test = _instances(cfg)
    table = _table(cfg, train + test)
    dump = extraction.extract(net, {"train": train, "test": test}, table, checkpoint=model.checkpoint_id(ckpt))
    extraction.save_dump(dump, cfg.output_dir / DUMP)
    correct, incorrect = extraction.partition(dump.records)
    print(f"extracted {len(dump)} words x {len(dump.layer_names)} layers; correct {len(correct)}, incorrect {len(incorrect)}")


def _correctness(dump_path: Path) -> dict[tuple[str, int], tuple[str, bool]]:
    # streaming read: labels only need split and correctness, not the vectors
    out = {}
    with open(dump_path, encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            cols = line.split("\t", 5)
            out[(cols[0], int(cols[1]))] = (cols[4], cols[3] == "1")
    return out


def cmd_label(cfg: RunConfig) -> None:
    dump_path = _require(cfg, DUMP, "label")
    for key in ("lexicon",):
        if key not in cfg.paths:
            raise ConfigError(f"label needs '{key}' in the config")
    lexicon = labeling.SentimentLexicon.load(cfg.paths["lexicon"])
    links = labeling.load_ontology_links(cfg.paths["ontology"]) if "ontology" in cfg.paths else None
    train, test = _instances(cfg)
    labels = labeling.label_all(train + test, lexicon, links, cfg.relation_max_edges)
    labeling.write_labels(cfg.output_dir / LABELS, labels)
    flags = _correctness(dump_path)
    tables = labeling.tabulate((*flags[(lab.opinion_id, lab.word_index)], lab) for lab in labels if (lab.opinion_id, lab.word_index) in flags)
    labeling.write_count_tables(cfg.output_dir / LABEL_COUNTS, tables)
    text = "\n\n".join(f"{task}\n{labeling.format_count_table(task, rows)}" for task, rows in tables.items())
    (cfg.output_dir / LABEL_TABLES).write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_probe(cfg: RunConfig) -> None:
    dump = extraction.load_dump(_require(cfg, DUMP, "probe"))
    labels = labeling.read_labels(_require(cfg, LABELS, "probe"))
    results = probing.run_suite(dump, labels, cfg.probe_tasks, cfg.probe_layers, seed=cfg.seed, runs=cfg.probe_runs, jobs=cfg.probe_jobs)
    probing.write_results(cfg.output_dir / RESULTS, results)
    print(f"wrote {len(results)} probe results to {cfg.output_dir / RESULTS}")


def cmd_report(cfg: RunConfig) -> None:
    src = _require(cfg, RESULTS, "report")
    rows = probing.read_results(src)
    figs = report.write_figures(rows, cfg.output_dir / FIGURES)
    order = {(t, p): k for k, (t, p) in enumerate((t, p) for t in labeling.TASKS for p in probing.PARTITIONS)}
    ordered = sorted(rows, key=lambda r: (order.get((r["task"], r["partition"]), 99), report._layer_key(r["layer"])))
    with open(cfg.output_dir / COMBINED, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(probing.RESULT_COLUMNS)
        for r in ordered:
            w.writerow([r["task"], r["layer"], r["partition"], r["class"],
                        "" if r["mean_acc"] is None else repr(r["mean_acc"]),
                        "" if r["std_acc"] is None else repr(r["std_acc"]), r["runs"]])
    print(f"wrote {len(figs)} figures to {cfg.output_dir / FIGURES}")


COMMANDS = {"train": cmd_train, "extract": cmd_extract, "label": cmd_label, "probe": cmd_probe, "report": cmd_report}


def _all(cfg: RunConfig) -> None:
    for fn in COMMANDS.values():
        fn(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "all"]:
        p = sub.add_parser(name, help="run every stage in order" if name == "all" else f"run the {name} stage")
        p.add_argument("--config", required=True, help="flat key=value config file, or 'demo' for the bundled corpus")
        p.add_argument("--seed", type=int, help="override the config's root seed")
        p.add_argument("--hops", type=int, help="override the number of rotatory hops")
        p.add_argument("--output", help="override the output directory")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, {"seed": args.seed, "hops": args.hops, "output_dir": args.output})
        (COMMANDS.get(args.command) or _all)(cfg)
    except (ConfigError, StageError, corpus.ParseError, corpus.AlignmentError, model.TrainingDiverged) as exc:
        print(f"rotprobe {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
