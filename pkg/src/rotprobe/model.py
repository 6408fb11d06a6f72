"""LCR-Rot-hop: three Bi-LSTMs, rotatory bilinear attention over n hops, softmax output."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import numerics as nx
from .corpus import POLARITIES, EmbeddingTable, OpinionInstance
from .numerics import Parameter, Tape, Tensor

logger = logging.getLogger(__name__)

PARTS = ("left", "target", "right")
ATTENTIONS = ("context_left", "context_right", "target_left", "target_right")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class HyperParams:
    hops: int = 10
    hidden: int = 300
    epochs: int = 150
    learning_rate: float = 0.05
    l2: float = 1e-5
    momentum: float = 0.9
    batch_size: int = 20
    dropout: float = 0.5
    seed: int = 0
    embedding_dim: int = 300
    forget_bias: float = 1.0
    dropout_sentence: bool = True

    def __post_init__(self):
        if self.hops < 1:
            raise ValueError(f"hops must be >= 1, got {self.hops}")
        if self.hidden < 1 or self.embedding_dim < 1:
            raise ValueError("hidden and embedding sizes must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 0 or self.l2 < 0:
            raise ValueError("learning_rate, batch_size, epochs and l2 out of range")

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        names = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, v in d.items():
            if k not in names:
                continue
            default = getattr(cls, k)
            if isinstance(default, bool):
                kw[k] = v if isinstance(v, bool) else str(v).strip().lower() in ("1", "true", "yes", "on")
            else:
                kw[k] = type(default)(v)
        return cls(**kw)


@dataclass
class HopTrace:
    alpha_left: np.ndarray
    alpha_right: np.ndarray
    alpha_target_left: np.ndarray
    alpha_target_right: np.ndarray
    r_left: np.ndarray
    r_right: np.ndarray
    r_target_left: np.ndarray
    r_target_right: np.ndarray


@dataclass
class ForwardTrace:
    embeddings: dict[str, np.ndarray]
    hidden: dict[str, np.ndarray]
    r_target_pooled: np.ndarray
    hops: list[HopTrace]
    sentence: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    logits_tensor: Tensor | None = field(default=None, repr=False)

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.probs))


def _zeros_tensor(n: int) -> Tensor:
    return Tensor(np.zeros(n))


def attend(states: Tensor, query: Tensor, W: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """Bilinear attention: tanh(h_i^T W q + b) scores, softmax weights, weighted sum of states."""
    if states.shape[0] == 0:
        raise ValueError("attention over an empty set of states")
    scores = nx.tanh(nx.add(nx.matmul(states, nx.matmul(W, query)), b))
    alpha = nx.softmax(scores)
    return alpha, nx.matmul(alpha, states)


class LcrRotHop:
    def __init__(self, hp: HyperParams, params: dict[str, Parameter] | None = None):
        self.hp = hp
        self.params = params if params is not None else self._init_params()

    # ------------------------------------------------------------ params

    def _init_params(self) -> dict[str, Parameter]:
        hp = self.hp
        d, e = hp.hidden, hp.embedding_dim
        rng = nx.stream(hp.seed, "init")
        p: dict[str, Parameter] = {}

        def uni(name, shape):
            p[name] = Parameter(nx.init_tensor("uniform", shape, rng, low=-0.1, high=0.1), name)

        for part in PARTS:
            for direction in ("fwd", "bwd"):
                pre = f"encoder.{part}.{direction}"
                uni(f"{pre}.wx", (4 * d, e))
                uni(f"{pre}.wh", (4 * d, d))
                bias = np.zeros(4 * d)
                bias[d : 2 * d] = hp.forget_bias
                p[f"{pre}.b"] = Parameter(bias, f"{pre}.b")
        for att in ATTENTIONS:
            uni(f"attention.{att}.W", (2 * d, 2 * d))
            p[f"attention.{att}.b"] = Parameter(np.zeros(1), f"attention.{att}.b")
        uni("output.W", (len(POLARITIES), 8 * d))
        p["output.b"] = Parameter(np.zeros(len(POLARITIES)), "output.b")
        return p

    def weights(self) -> list[Parameter]:
        """Parameters subject to the L2 penalty (everything but biases)."""
        return [v for k, v in self.params.items() if not k.endswith(".b")]

    # ------------------------------------------------------------ forward

    def encode(self, emb: np.ndarray, part: str, backend: str | None = None) -> Tensor:
        """Bi-LSTM hidden states (len, 2d) for one part; empty parts give a (0, 2d) tensor."""
        d = self.hp.hidden
        if emb.shape[0] == 0:
            return Tensor(np.zeros((0, 2 * d)))
        x = Tensor(emb)
        outs = []
        for direction, reverse in (("fwd", False), ("bwd", True)):
            pre = f"encoder.{part}.{direction}"
            outs.append(
                nx.lstm_sequence(x, self.params[f"{pre}.wx"], self.params[f"{pre}.wh"], self.params[f"{pre}.b"], reverse=reverse, backend=backend)
            )
        return nx.hstack(outs[0], outs[1])

    def forward(self, embeddings: dict[str, np.ndarray], training: bool = False, rng: np.random.Generator | None = None) -> ForwardTrace:
        hp = self.hp
        if embeddings["target"].shape[0] == 0:
            raise ValueError("an opinion needs at least one target token")
        rate = hp.dropout if training else 0.0
        states = {}
        for part in PARTS:
            h = self.encode(embeddings[part], part)
            if h.shape[0]:
                h = nx.dropout(h, rate, training, rng)
            states[part] = h

        att = {a: (self.params[f"attention.{a}.W"], self.params[f"attention.{a}.b"]) for a in ATTENTIONS}
        two_d = 2 * hp.hidden
        r_tp = nx.mean_rows(states["target"])
        q_left = q_right = r_tp
        hops = []
        empty = np.zeros(0)
        for _ in range(hp.hops):
            if states["left"].shape[0]:
                a_l, r_l = attend(states["left"], q_left, *att["context_left"])
            else:
                a_l, r_l = Tensor(empty), _zeros_tensor(two_d)
            if states["right"].shape[0]:
                a_r, r_r = attend(states["right"], q_right, *att["context_right"])
            else:
                a_r, r_r = Tensor(empty), _zeros_tensor(two_d)
            a_tl, r_tl = attend(states["target"], r_l, *att["target_left"])
            a_tr, r_tr = attend(states["target"], r_r, *att["target_right"])
            hops.append(HopTrace(a_l.data, a_r.data, a_tl.data, a_tr.data, r_l.data, r_r.data, r_tl.data, r_tr.data))
            q_left, q_right = r_tl, r_tr

        s = nx.concat([r_l, r_tl, r_tr, r_r])
        s_in = nx.dropout(s, rate, training, rng) if hp.dropout_sentence else s
        logits = nx.add(nx.matmul(self.params["output.W"], s_in), self.params["output.b"])
        return ForwardTrace(
            embeddings=embeddings,
            hidden={k: v.data for k, v in states.items()},
            r_target_pooled=r_tp.data,
            hops=hops,
            sentence=s.data,
            logits=logits.data,
            probs=nx.softmax_array(logits.data),
            logits_tensor=logits,
        )

    def predict(self, embeddings: dict[str, np.ndarray]) -> int:
        return self.forward(embeddings).prediction

    # ------------------------------------------------------------ persistence

    def save(self, path) -> None:
        save_checkpoint(path, self.hp, self.params)

    @classmethod
    def load(cls, path) -> "LcrRotHop":
        hp, params = load_checkpoint(path)
        return cls(hp, params)


def embed_instance(inst: OpinionInstance, table: EmbeddingTable) -> dict[str, np.ndarray]:
    return {"left": table.matrix(inst.left), "target": table.matrix(inst.target), "right": table.matrix(inst.right)}


# ---------------------------------------------------------------- training


@dataclass
class EpochLog:
    epoch: int
    mean_loss: float
    train_acc: float


def batch_loss(model: LcrRotHop, batch: Sequence[tuple[dict, int]], rng: np.random.Generator | None, training: bool = True) -> tuple[Tensor, int]:
    """Mean cross-entropy over ``batch`` plus the L2 term, and the number of hits."""
    losses = []
    hits = 0
    for emb, gold in batch:
        tr = model.forward(emb, training=training, rng=rng)
        hits += tr.prediction == gold
        losses.append(nx.cross_entropy(tr.logits_tensor, gold))
    data = losses[0] if len(losses) == 1 else nx.total(nx.stack(losses))
    data = nx.scale(data, 1.0 / len(batch))
    return nx.add(data, nx.l2_penalty(model.weights(), model.hp.l2)), hits


def train(
    instances: Sequence[OpinionInstance],
    table: EmbeddingTable,
    hp: HyperParams,
    model: LcrRotHop | None = None,
    log_every: int = 1,
) -> tuple[LcrRotHop, list[EpochLog]]:
    if not instances:
        raise ValueError("empty training set")
    model = model or LcrRotHop(hp)
    data = [(embed_instance(i, table), i.polarity) for i in instances]
    params = list(model.params.values())
    history = []
    for epoch in range(1, hp.epochs + 1):
        order = nx.stream(hp.seed, "shuffle", epoch).permutation(len(data))
        drop_rng = nx.stream(hp.seed, "dropout", epoch)
        loss_sum = 0.0
        hits = 0
        for lo in range(0, len(order), hp.batch_size):
            batch = [data[k] for k in order[lo : lo + hp.batch_size]]
            with Tape() as tape:
                loss, h = batch_loss(model, batch, drop_rng)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDiverged(f"loss became {value} in epoch {epoch}")
            tape.backward(loss)
            nx.sgd_momentum_step(params, hp.learning_rate, hp.momentum)
            loss_sum += value * len(batch)
            hits += h
        rec = EpochLog(epoch, loss_sum / len(data), hits / len(data))
        history.append(rec)
        if log_every and epoch % log_every == 0:
            logger.info("epoch %d loss %.6f train_acc %.4f", epoch, rec.mean_loss, rec.train_acc)
    return model, history


def write_training_log(path, history: Iterable[EpochLog]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("epoch,mean_loss,train_acc\n")
        for rec in history:
            fh.write(f"{rec.epoch},{rec.mean_loss!r},{rec.train_acc!r}\n")


# ---------------------------------------------------------------- evaluation


@dataclass
class AccuracyReport:
    freq: list[int]
    correct: list[int]

    @property
    def per_class(self) -> list[float | None]:
        return [c / f if f else None for c, f in zip(self.correct, self.freq)]

    @property
    def overall(self) -> float:
        n = sum(self.freq)
        return sum(self.correct) / n if n else float("nan")

    @property
    def total(self) -> int:
        return sum(self.freq)


def predict_all(model: LcrRotHop, instances: Sequence[OpinionInstance], table: EmbeddingTable) -> list[int]:
    return [model.predict(embed_instance(i, table)) for i in instances]


def accuracy_report(gold: Sequence[int], pred: Sequence[int]) -> AccuracyReport:
    k = len(POLARITIES)
    freq, correct = [0] * k, [0] * k
    for g, p in zip(gold, pred):
        freq[g] += 1
        correct[g] += g == p
    return AccuracyReport(freq, correct)


def evaluate(model: LcrRotHop, instances: Sequence[OpinionInstance], table: EmbeddingTable) -> AccuracyReport:
    return accuracy_report([i.polarity for i in instances], predict_all(model, instances, table))


def format_accuracy_table(train: AccuracyReport, test: AccuracyReport) -> str:
    def cell(f, a):
        return f"{f:>6} {('%.1f' % (100 * a)) if a is not None else '-':>8}"

    lines = [
        f"{'':<10}{'Training set':^16}{'Test set':^16}",
        f"{'':<10}{'Freq.':>6} {'acc. (%)':>8} {'Freq.':>6} {'acc. (%)':>8}",
    ]
    for k, name in enumerate(POLARITIES):
        lines.append(f"{name.capitalize():<10}{cell(train.freq[k], train.per_class[k])} {cell(test.freq[k], test.per_class[k])}")
    lines.append(f"{'Overall':<10}{cell(train.total, train.overall)} {cell(test.total, test.overall)}")
    return "\n".join(lines)


# ---------------------------------------------------------------- checkpoint

_MAGIC = b"LCRROTHOP-CKPT\n"
_VERSION = 1


def save_checkpoint(path, hp: HyperParams, params: dict[str, Parameter]) -> None:
    """Binary container: magic line, JSON header line, raw little-endian float64 payload."""
    entries = []
    offset = 0
    for name in sorted(params):
        arr = params[name].data
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
    header = json.dumps({"version": _VERSION, "hyperparams": asdict(hp), "seed": hp.seed, "tensors": entries}, sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header.encode("utf-8") + b"\n")
        for name in sorted(params):
            fh.write(np.ascontiguousarray(params[name].data, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[HyperParams, dict[str, Parameter]]:
    raw = Path(path).read_bytes()
    if not raw.startswith(_MAGIC):
        raise ValueError(f"{path}: not a model checkpoint")
    nl = raw.index(b"\n", len(_MAGIC))
    header = json.loads(raw[len(_MAGIC) : nl])
    if header.get("version") != _VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
    payload = np.frombuffer(raw[nl + 1 :], dtype="<f8")
    hp = HyperParams.from_dict(header["hyperparams"])
    params = {}
    for ent in header["tensors"]:
        n = int(np.prod(ent["shape"], dtype=np.int64))
        arr = payload[ent["offset"] : ent["offset"] + n].astype(np.float64).reshape(ent["shape"])
        params[ent["name"]] = Parameter(arr, ent["name"])
    return hp, params


def checkpoint_id(path) -> str:
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
