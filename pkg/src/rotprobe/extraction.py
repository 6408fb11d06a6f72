"""Per-word internal layers of a trained model, and the line-oriented dump format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .corpus import EmbeddingTable, OpinionInstance
from .model import ForwardTrace, LcrRotHop, embed_instance


@dataclass
class WordRecord:
    opinion_id: str
    word_index: int
    part: str
    correct: bool
    split: str
    layers: dict[str, np.ndarray]


@dataclass
class RepresentationDump:
    hops: int
    d: int
    dims: dict[str, int]
    checkpoint: str = ""
    records: list[WordRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def layer_names(self) -> list[str]:
        return layer_names(self.hops)


def layer_names(hops: int) -> list[str]:
    return ["e", "h"] + [f"r_{j}" for j in range(1, hops + 1)]


def word_context_reps(trace: ForwardTrace, side: str) -> list[np.ndarray]:
    """r_ij = alpha_ij * h_i for every word of one context side, stacked over hops: (n_words, hops, 2d)."""
    h = trace.hidden[side]
    if h.shape[0] == 0:
        return []
    alphas = np.stack([getattr(hop, f"alpha_{side}") for hop in trace.hops], axis=1)  # (words, hops)
    reps = alphas[:, :, None] * h[:, None, :]
    return [reps[i] for i in range(h.shape[0])]


def instance_records(model: LcrRotHop, inst: OpinionInstance, table: EmbeddingTable, split: str) -> list[WordRecord]:
    emb = embed_instance(inst, table)
    trace = model.forward(emb)
    correct = trace.prediction == inst.polarity
    out = []
    k = 0
    for part in ("left", "target", "right"):
        reps = word_context_reps(trace, part) if part != "target" else None
        for i in range(emb[part].shape[0]):
            layers = {"e": emb[part][i], "h": trace.hidden[part][i]}
            if reps is not None:
                for j in range(model.hp.hops):
                    layers[f"r_{j + 1}"] = reps[i][j]
            out.append(WordRecord(inst.id, k, part, bool(correct), split, layers))
            k += 1
    return out


def extract(
    model: LcrRotHop,
    splits: dict[str, Sequence[OpinionInstance]],
    table: EmbeddingTable,
    checkpoint: str = "",
) -> RepresentationDump:
    hp = model.hp
    names = layer_names(hp.hops)
    dims = {n: (hp.embedding_dim if n == "e" else 2 * hp.hidden) for n in names}
    dump = RepresentationDump(hp.hops, hp.hidden, dims, checkpoint)
    for split, instances in splits.items():
        for inst in instances:
            dump.records.extend(instance_records(model, inst, table, split))
    return dump


def partition(records: Iterable[WordRecord]) -> tuple[list[WordRecord], list[WordRecord]]:
    correct, incorrect = [], []
    for r in records:
        (correct if r.correct else incorrect).append(r)
    return correct, incorrect


# ---------------------------------------------------------------- file format


def _fmt(v: np.ndarray) -> str:
    return ",".join("%.17g" % x for x in v)


def write_dump(dump: RepresentationDump, fh: TextIO) -> None:
    header = {"hops": dump.hops, "d": dump.d, "dims": dump.dims, "checkpoint": dump.checkpoint}
    fh.write(json.dumps(header, sort_keys=True) + "\n")
    for r in dump.records:
        cols = [r.opinion_id, str(r.word_index), r.part, "1" if r.correct else "0", r.split]
        cols += [f"{name}:{_fmt(vec)}" for name, vec in r.layers.items()]
        fh.write("\t".join(cols) + "\n")


def save_dump(dump: RepresentationDump, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_dump(dump, fh)


def iter_dump(fh: TextIO) -> tuple[dict, Iterator[WordRecord]]:
    header = json.loads(fh.readline())

    def records():
        for lineno, line in enumerate(fh, 2):
            cols = line.rstrip("\n").split("\t")
            if len(cols) < 7:
                raise ValueError(f"dump line {lineno}: expected at least 7 fields, got {len(cols)}")
            layers = {}
            for col in cols[5:]:
                name, _, vals = col.partition(":")
                vec = np.array(vals.split(","), dtype=np.float64)
                if vec.shape[0] != header["dims"][name]:
                    raise ValueError(f"dump line {lineno}: layer {name} has {vec.shape[0]} values, header says {header['dims'][name]}")
                layers[name] = vec
            yield WordRecord(cols[0], int(cols[1]), cols[2], cols[3] == "1", cols[4], layers)

    return header, records()


def load_dump(path) -> RepresentationDump:
    with open(path, encoding="utf-8") as fh:
        header, recs = iter_dump(fh)
        dump = RepresentationDump(header["hops"], header["d"], header["dims"], header.get("checkpoint", ""), list(recs))
    return dump
