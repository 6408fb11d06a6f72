"""Diagnostic classifiers over extracted layers: balanced bootstrap subsets, training, aggregation."""

from __future__ import annotations

import csv
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import numerics as nx
from .extraction import RepresentationDump, WordRecord
from .labeling import TASKS, WordLabels
from .numerics import Parameter, Tape

logger = logging.getLogger(__name__)

HIDDEN_UNITS = 300
PROBE_LR = 1e-4
PROBE_BATCH = 20
N_RUNS = 10
PARTITIONS = ("correct", "incorrect", "train_subset", "train_full")


@dataclass(frozen=True)
class ProbeTask:
    id: str
    classes: tuple[str, ...]
    epochs: int

    @property
    def n_classes(self) -> int:
        return len(self.classes)


PROBE_TASKS = {t: ProbeTask(t, cls, 20 if t == "POS" else 90) for t, cls in TASKS.items()}


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SamplingPlan:
    counts: tuple[int, ...]
    largest: int
    q_mean: int
    draws: tuple[int, ...]


def plan_sample(counts: Sequence[int] | Mapping[object, int]) -> SamplingPlan:
    """Draw min(q_c, q_mean) per class, q_mean being the floored mean of the
    class counts except the largest (lowest index wins a tie).

    Classes with no words at all do not take part in the mean and get zero draws.
    """
    q = [int(c) for c in (counts.values() if isinstance(counts, Mapping) else counts)]
    if any(c < 0 for c in q):
        raise ValueError(f"class counts must be nonnegative: {q}")
    present = [c for c in q if c > 0]
    if len(present) < 2:
        raise ValueError(f"sub-sampling needs at least two populated classes, got counts {q}")
    largest = int(np.argmax(q))
    rest = [c for k, c in enumerate(q) if k != largest and c > 0]
    q_mean = sum(rest) // len(rest)
    return SamplingPlan(tuple(q), largest, q_mean, tuple(min(c, q_mean) for c in q))


def make_subsets(y: np.ndarray, plan: SamplingPlan, count: int, seed: int, *tag: object) -> list[np.ndarray]:
    """``count`` index sets into ``y``, each drawn with replacement per class to the plan's sizes."""
    y = np.asarray(y)
    by_class = [np.flatnonzero(y == c) for c in range(len(plan.counts))]
    subsets = []
    for k in range(count):
        rng = nx.stream(seed, "subset", *tag, k)
        parts = [rng.choice(idx, size=n, replace=True) for idx, n in zip(by_class, plan.draws) if n > 0]
        subsets.append(np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64))
    return subsets


# ---------------------------------------------------------------- probe network


class DiagnosticClassifier:
    """One ReLU hidden layer of 300 units, softmax output."""

    def __init__(self, n_in: int, n_classes: int, rng: np.random.Generator, hidden: int = HIDDEN_UNITS):
        self.n_in, self.n_classes, self.hidden = n_in, n_classes, hidden
        self.W1 = Parameter(nx.init_tensor("uniform", (n_in, hidden), rng, low=-0.1, high=0.1), "W1")
        self.b1 = Parameter(np.zeros(hidden), "b1")
        self.W2 = Parameter(nx.init_tensor("uniform", (hidden, n_classes), rng, low=-0.1, high=0.1), "W2")
        self.b2 = Parameter(np.zeros(n_classes), "b2")

    @property
    def params(self) -> list[Parameter]:
        return [self.W1, self.b1, self.W2, self.b2]

    def logits(self, X) -> nx.Tensor:
        hid = nx.relu(nx.add(nx.matmul(X, self.W1), self.b1))
        return nx.add(nx.matmul(hid, self.W2), self.b2)

    def predict(self, X: np.ndarray) -> np.ndarray:
        if X.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        hid = np.maximum(X @ self.W1.data + self.b1.data, 0.0)
        return np.argmax(hid @ self.W2.data + self.b2.data, axis=1)


def train_probe(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    epochs: int,
    seed: int,
    *tag: object,
    lr: float = PROBE_LR,
    batch_size: int = PROBE_BATCH,
) -> DiagnosticClassifier:
    """Plain mini-batch gradient descent on mean cross-entropy."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"probe training needs a non-empty 2-D input, got shape {X.shape}")
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
    clf = DiagnosticClassifier(X.shape[1], n_classes, nx.stream(seed, "probe-init", *tag))
    shuffle = nx.stream(seed, "probe-shuffle", *tag)
    for _ in range(epochs):
        order = shuffle.permutation(X.shape[0])
        for lo in range(0, len(order), batch_size):
            idx = order[lo : lo + batch_size]
            with Tape() as tape:
                loss = nx.softmax_cross_entropy_rows(clf.logits(X[idx]), y[idx])
            tape.backward(loss)
            nx.sgd_momentum_step(clf.params, lr, 0.0)
    return clf


@dataclass
class Accuracy:
    per_class: list[float | None]
    overall: float
    support: list[int]


def accuracy(pred: np.ndarray, y: np.ndarray, n_classes: int) -> Accuracy:
    if y.shape[0] == 0:
        raise ValueError("accuracy over an empty partition is undefined")
    hit = pred == y
    per, support = [], []
    for c in range(n_classes):
        mask = y == c
        support.append(int(mask.sum()))
        per.append(float(hit[mask].mean()) if mask.any() else None)
    return Accuracy(per, float(hit.mean()), support)


def evaluate_probe(clf: DiagnosticClassifier, X: np.ndarray, y: np.ndarray) -> Accuracy:
    if X.shape[1] != clf.n_in:
        raise ValueError(f"probe expects {clf.n_in}-d inputs, got {X.shape[1]}")
    return accuracy(clf.predict(X), np.asarray(y), clf.n_classes)


# ---------------------------------------------------------------- suite


@dataclass
class ProbeResult:
    task: str
    layer: str
    partition: str
    classes: tuple[str, ...]
    per_class: list[tuple[float, float] | None]
    overall: tuple[float, float]
    runs: int
    run_overall: list[float]


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation, computed exactly (identical runs give 0.0)."""
    vals = [float(v) for v in values]
    return statistics.mean(vals), statistics.pstdev(vals)


def aggregate(task: ProbeTask, layer: str, partition: str, accs: Sequence[Accuracy]) -> ProbeResult:
    per = []
    for c in range(task.n_classes):
        vals = [a.per_class[c] for a in accs if a.per_class[c] is not None]
        per.append(mean_std(vals) if vals else None)
    overall = [a.overall for a in accs]
    return ProbeResult(task.id, layer, partition, task.classes, per, mean_std(overall), len(accs), overall)


@dataclass
class LayerData:
    """Inputs and labels of one layer split into the probe populations."""

    train: np.ndarray
    train_y: np.ndarray
    correct: np.ndarray
    correct_y: np.ndarray
    incorrect: np.ndarray
    incorrect_y: np.ndarray


def _population(records: Sequence[WordRecord], layer: str) -> list[WordRecord]:
    if layer.startswith("r_"):
        return [r for r in records if r.part != "target"]
    return list(records)


def layer_data(dump: RepresentationDump, labels: Mapping[tuple[str, int], WordLabels], task: str, layer: str) -> LayerData:
    pop = _population(dump.records, layer)
    groups = {
        "train": [r for r in pop if r.split == "train" and r.correct],
        "correct": [r for r in pop if r.split == "test" and r.correct],
        "incorrect": [r for r in pop if r.split == "test" and not r.correct],
    }
    dim = dump.dims[layer]
    out = {}
    for name, recs in groups.items():
        X = np.stack([r.layers[layer] for r in recs]) if recs else np.zeros((0, dim))
        try:
            y = np.array([labels[(r.opinion_id, r.word_index)].index(task) for r in recs], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"no labels for word {exc.args[0]}; label the same corpus that was extracted") from None
        out[name], out[f"{name}_y"] = X, y
    return LayerData(**out)


def run_cell(task: ProbeTask, layer: str, data: LayerData, seed: int, runs: int = N_RUNS, population: str | None = None) -> list[ProbeResult]:
    """Train ``runs`` probes for one (task, layer) and aggregate per partition."""
    counts = np.bincount(data.train_y, minlength=task.n_classes)
    plan = plan_sample(counts)
    pop = population or ("context" if layer.startswith("r_") else "all")
    subsets = make_subsets(data.train_y, plan, runs, seed, task.id, pop)
    accs: dict[str, list[Accuracy]] = {p: [] for p in PARTITIONS}
    for k, idx in enumerate(subsets):
        if idx.size == 0:
            raise ValueError(f"{task.id}/{layer}: empty training subset (class counts {counts.tolist()})")
        clf = train_probe(data.train[idx], data.train_y[idx], task.n_classes, task.epochs, seed, task.id, layer, k)
        accs["train_subset"].append(evaluate_probe(clf, data.train[idx], data.train_y[idx]))
        accs["train_full"].append(evaluate_probe(clf, data.train, data.train_y))
        for part in ("correct", "incorrect"):
            X, y = getattr(data, part), getattr(data, f"{part}_y")
            if y.shape[0]:
                accs[part].append(evaluate_probe(clf, X, y))
    results = [aggregate(task, layer, p, a) for p, a in accs.items() if a]
    missing = [p for p, a in accs.items() if not a]
    if missing:
        logger.warning("%s/%s: no words in partition(s) %s; nothing reported there", task.id, layer, ", ".join(missing))
    return results


def _cell_job(args):
    return run_cell(*args)


def run_suite(
    dump: RepresentationDump,
    labels: Mapping[tuple[str, int], WordLabels],
    tasks: Sequence[str] | None = None,
    layers: Sequence[str] | None = None,
    seed: int = 0,
    runs: int = N_RUNS,
    jobs: int = 1,
) -> list[ProbeResult]:
    tasks = list(tasks or PROBE_TASKS)
    layers = list(layers or dump.layer_names)
    cells = [(PROBE_TASKS[t], layer, layer_data(dump, labels, t, layer), seed, runs) for t in tasks for layer in layers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_cell_job, cells))
    else:
        chunks = []
        for cell in cells:
            logger.info("probing %s on %s", cell[0].id, cell[1])
            chunks.append(_cell_job(cell))
    return [r for chunk in chunks for r in chunk]


# ---------------------------------------------------------------- results file

RESULT_COLUMNS = ["task", "layer", "partition", "class", "mean_acc", "std_acc", "runs"]


def write_results(path, results: Sequence[ProbeResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for res in results:
            for cls, ms in zip(res.classes, res.per_class):
                if ms is None:
                    w.writerow([res.task, res.layer, res.partition, cls, "", "", 0])
                else:
                    w.writerow([res.task, res.layer, res.partition, cls, repr(ms[0]), repr(ms[1]), res.runs])
            w.writerow([res.task, res.layer, res.partition, "overall", repr(res.overall[0]), repr(res.overall[1]), res.runs])


def read_results(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            row["mean_acc"] = float(row["mean_acc"]) if row["mean_acc"] else None
            row["std_acc"] = float(row["std_acc"]) if row["std_acc"] else None
            row["runs"] = int(row["runs"])
            rows.append(row)
    return rows
