"""Trainable parameters, initialisers and gradient-descent updates."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .tensor import Tensor


class Parameter(Tensor):
    """A leaf tensor with a gradient slot and a momentum buffer."""

    __slots__ = ("velocity",)

    def __init__(self, data, name: str | None = None):
        super().__init__(np.array(data, dtype=np.float64, copy=True), requires_grad=True, name=name)
        self.velocity = np.zeros_like(self.data)

    @property
    def value(self) -> Tensor:
        return self

    @property
    def gradient(self) -> np.ndarray:
        return self.grad if self.grad is not None else np.zeros_like(self.data)


def init_tensor(kind: str, shape: Sequence[int], rng: np.random.Generator | None = None, **kw) -> np.ndarray:
    """Draw an array for ``kind`` in {"uniform", "normal", "zeros", "constant"}.

    ``uniform`` takes ``low``/``high``, ``normal`` takes ``mean``/``std`` and
    ``constant`` takes ``value``.
    """
    shape = tuple(int(s) for s in shape)
    if kind == "zeros":
        return np.zeros(shape)
    if kind == "constant":
        return np.full(shape, float(kw.get("value", 0.0)))
    if rng is None:
        raise ValueError(f"{kind} initialisation needs a random stream")
    if kind == "uniform":
        low, high = float(kw.get("low", -0.1)), float(kw.get("high", 0.1))
        if not low < high:
            raise ValueError(f"uniform bounds need low < high, got ({low}, {high})")
        return rng.uniform(low, high, size=shape)
    if kind == "normal":
        mean, std = float(kw.get("mean", 0.0)), float(kw.get("std", 1.0))
        if not std > 0:
            raise ValueError(f"normal std must be positive, got {std}")
        return rng.normal(mean, std, size=shape)
    raise ValueError(f"unknown initialiser {kind!r}")


def sgd_momentum_step(params: Iterable[Parameter], lr: float, mu: float = 0.0) -> None:
    """Classical momentum: v <- mu*v - lr*g; theta <- theta + v. Clears gradients."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"momentum must lie in [0, 1), got {mu}")
    for p in params:
        p.velocity *= mu
        if p.grad is not None:
            p.velocity -= lr * p.grad
        p.data += p.velocity
        p.grad = None


def zero_grad(params: Iterable[Parameter]) -> None:
    for p in params:
        p.grad = None
