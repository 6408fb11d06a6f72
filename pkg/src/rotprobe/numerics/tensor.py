"""Dense float64 tensors with a reverse-mode tape.

Every differentiable op appends one entry to the active :class:`Tape`;
:meth:`Tape.backward` replays those entries in exact reverse order. Gradients
accumulate additively, so a tensor used twice receives the sum of both
contributions.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Sequence

import numpy as np

_local = threading.local()


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(())
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the data."""
        return self.data.reshape(-1)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag})"

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True).reshape(self.data.shape)
        else:
            self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    # operator sugar for the handful of ops the model composes
    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Ordered record of executed differentiable ops."""

    def __init__(self):
        self.entries: list[tuple[Tensor, Callable[[np.ndarray], None]]] = []
        self._prev: Tape | None = None

    def __enter__(self) -> "Tape":
        self._prev = getattr(_local, "tape", None)
        _local.tape = self
        return self

    def __exit__(self, *exc) -> None:
        _local.tape = self._prev
        self._prev = None

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, out: Tensor, backward: Callable[[np.ndarray], None]) -> None:
        self.entries.append((out, backward))

    def backward(self, loss: Tensor, seed: np.ndarray | float | None = None) -> None:
        """Reverse sweep from ``loss``; consumes the tape."""
        if seed is None:
            if loss.data.size != 1:
                raise ShapeError(f"backward needs a scalar loss or an explicit seed, got shape {loss.shape}")
            seed = np.ones_like(loss.data)
        loss.accumulate(np.broadcast_to(np.asarray(seed, dtype=np.float64), loss.shape))
        for out, fn in reversed(self.entries):
            if out.grad is not None:
                fn(out.grad)
        self.entries.clear()


def active_tape() -> Tape | None:
    return getattr(_local, "tape", None)


def _result(data: np.ndarray, inputs: Sequence[Tensor], backward) -> Tensor:
    needs = any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs)
    tape = active_tape()
    if needs and tape is not None:
        tape.record(out, backward)
    return out


def _push(t: Tensor, g: np.ndarray) -> None:
    if t.requires_grad:
        t.accumulate(g)


# --------------------------------------------------------------------------
# linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product. 1-D operands follow numpy's vector conventions."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim == 0 or b.data.ndim == 0 or a.data.ndim > 2 or b.data.ndim > 2:
        raise ShapeError(f"matmul expects 1-D or 2-D operands, got {a.shape} and {b.shape}")
    k_a = a.shape[-1]
    k_b = b.shape[0]
    if k_a != k_b:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")
    A, B = a.data, b.data

    def backward(g):
        if a.requires_grad:
            if B.ndim == 1:
                ga = np.multiply.outer(g, B) if A.ndim == 2 else g * B
            else:
                ga = g @ B.T
            a.accumulate(ga)
        if b.requires_grad:
            if A.ndim == 1:
                gb = np.multiply.outer(A, g) if B.ndim == 2 else A * g
            else:
                gb = A.T @ g
            b.accumulate(gb)

    return _result(A @ B, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; ``b`` may be a row vector added to every row of ``a``, or a scalar."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        row_bias = a.data.ndim == 2 and b.data.ndim == 1 and b.shape[0] == a.shape[1]
        scalar = b.data.size == 1 and b.data.ndim <= 1
        if not (row_bias or scalar):
            raise ShapeError(f"add: cannot combine {a.shape} and {b.shape}")

    def backward(g):
        _push(a, g)
        if b.requires_grad:
            if b.shape == g.shape:
                b.accumulate(g)
            elif b.data.ndim == 1 and g.ndim == 2 and b.shape[0] == g.shape[1]:
                b.accumulate(g.sum(axis=0))
            else:
                b.accumulate(np.full(b.shape, g.sum()))

    return _result(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of equally shaped tensors, or tensor times scalar."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and b.data.size != 1:
        raise ShapeError(f"mul: cannot combine {a.shape} and {b.shape}")
    A, B = a.data, b.data

    def backward(g):
        _push(a, g * B)
        if b.requires_grad:
            gb = g * A
            b.accumulate(gb if b.shape == gb.shape else np.full(b.shape, gb.sum()))

    return _result(A * B, (a, b), backward)


def scale(x: Tensor, c: float) -> Tensor:
    x = as_tensor(x)
    c = float(c)
    return _result(x.data * c, (x,), lambda g: _push(x, g * c))


def total(x: Tensor) -> Tensor:
    """Sum of all entries as a scalar tensor."""
    x = as_tensor(x)
    return _result(np.array(x.data.sum()), (x,), lambda g: _push(x, np.full(x.shape, float(g))))


# --------------------------------------------------------------------------
# pointwise


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: Tensor) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)
    return _result(t, (x,), lambda g: _push(x, g * (1.0 - t * t)))


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    s = _sigmoid(x.data)
    return _result(s, (x,), lambda g: _push(x, g * s * (1.0 - s)))


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _result(np.where(mask, x.data, 0.0), (x,), lambda g: _push(x, g * mask))


_POINTWISE = {"tanh": tanh, "sigmoid": sigmoid, "relu": relu}


def pointwise(op: str, x: Tensor) -> Tensor:
    try:
        fn = _POINTWISE[op]
    except KeyError:
        raise ValueError(f"unknown pointwise op {op!r}; expected one of {sorted(_POINTWISE)}") from None
    return fn(x)


# --------------------------------------------------------------------------
# normalisation and losses


def softmax_array(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax_array(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = x.max(axis=axis, keepdims=True)
    z = x - m
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def softmax(x: Tensor) -> Tensor:
    x = as_tensor(x)
    if x.data.ndim != 1:
        raise ShapeError(f"softmax expects a vector, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValueError("softmax of an empty vector")
    p = softmax_array(x.data)

    def backward(g):
        _push(x, p * (g - np.dot(g, p)))

    return _result(p, (x,), backward)


def cross_entropy(scores: Tensor, gold: int) -> Tensor:
    """-log softmax(scores)[gold] for a logit vector."""
    scores = as_tensor(scores)
    n = scores.shape[0] if scores.data.ndim == 1 else 0
    if not 0 <= gold < n:
        raise IndexError(f"gold class {gold} out of range for {n} scores")
    logp = log_softmax_array(scores.data)

    def backward(g):
        d = np.exp(logp)
        d[gold] -= 1.0
        _push(scores, float(g) * d)

    return _result(np.array(-logp[gold]), (scores,), backward)


def l2_penalty(params: Iterable[Tensor], lam: float) -> Tensor:
    """lam * sum of squared entries over ``params``."""
    if lam < 0:
        raise ValueError(f"L2 coefficient must be nonnegative, got {lam}")
    params = list(params)
    value = lam * sum(float(np.dot(p.values, p.values)) for p in params)

    def backward(g):
        for p in params:
            _push(p, (2.0 * lam * float(g)) * p.data)

    return _result(np.array(value), params, backward)


def cross_entropy_l2(scores: Tensor, gold: int, params: Sequence[Tensor], lam: float) -> Tensor:
    loss = cross_entropy(scores, gold)
    if lam == 0 or not params:
        return loss
    return add(loss, l2_penalty(params, lam))


def softmax_cross_entropy_rows(logits: Tensor, gold: np.ndarray) -> Tensor:
    """Mean cross-entropy over the rows of a (batch, classes) logit matrix."""
    logits = as_tensor(logits)
    gold = np.asarray(gold, dtype=np.int64)
    if logits.data.ndim != 2 or logits.shape[0] != gold.shape[0]:
        raise ShapeError(f"logits {logits.shape} do not match {gold.shape[0]} labels")
    rows = np.arange(gold.shape[0])
    logp = log_softmax_array(logits.data, axis=1)
    value = -logp[rows, gold].mean()

    def backward(g):
        d = np.exp(logp)
        d[rows, gold] -= 1.0
        _push(logits, d * (float(g) / gold.shape[0]))

    return _result(np.array(value), (logits,), backward)


# --------------------------------------------------------------------------
# structure


def concat(parts: Sequence[Tensor]) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise ValueError("concat of an empty list")
    for p in parts:
        if p.data.ndim != 1:
            raise ShapeError(f"concat expects vectors, got shape {p.shape}")
    bounds = np.cumsum([0] + [p.shape[0] for p in parts])

    def backward(g):
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            _push(p, g[lo:hi])

    return _result(np.concatenate([p.data for p in parts]), parts, backward)


def stack(rows: Sequence[Tensor]) -> Tensor:
    rows = [as_tensor(r) for r in rows]
    if not rows:
        raise ValueError("stack of an empty list")

    def backward(g):
        for i, r in enumerate(rows):
            _push(r, g[i])

    return _result(np.stack([r.data for r in rows]), rows, backward)


def row(x: Tensor, i: int) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        if x.requires_grad:
            full = np.zeros_like(x.data)
            full[i] = g
            x.accumulate(full)

    return _result(x.data[i].copy(), (x,), backward)


def hstack(a: Tensor, b: Tensor) -> Tensor:
    """Join two matrices with equal row count side by side."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"hstack: incompatible shapes {a.shape} and {b.shape}")
    k = a.shape[1]

    def backward(g):
        _push(a, g[:, :k])
        _push(b, g[:, k:])

    return _result(np.hstack([a.data, b.data]), (a, b), backward)


def mean_rows(x: Tensor) -> Tensor:
    """Arithmetic mean over the rows of a matrix."""
    x = as_tensor(x)
    if x.data.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"mean over rows needs a non-empty matrix, got shape {x.shape}")
    n = x.shape[0]
    return _result(x.data.mean(axis=0), (x,), lambda g: _push(x, np.broadcast_to(g / n, x.shape)))


def mean_pool(rows: Sequence[Tensor] | Tensor) -> Tensor:
    if isinstance(rows, Tensor):
        return mean_rows(rows)
    if not rows:
        raise ValueError("mean_pool of an empty list")
    return mean_rows(stack(rows))


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout: the identity in eval mode."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs a random stream")
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep) / keep
    return _result(x.data * mask, (x,), lambda g: _push(x, g * mask))
