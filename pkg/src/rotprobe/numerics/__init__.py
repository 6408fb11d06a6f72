"""Dense float64 kernel: tensors, a reverse-mode tape, and momentum SGD."""

from .kernels import HAS_EXTENSION, backend_name, set_backend
from .lstm import lstm_sequence
from .optim import Parameter, init_tensor, sgd_momentum_step, zero_grad
from .seeding import stream
from .tensor import (
    ShapeError,
    Tape,
    Tensor,
    add,
    as_tensor,
    concat,
    cross_entropy,
    cross_entropy_l2,
    dropout,
    hstack,
    l2_penalty,
    log_softmax_array,
    matmul,
    mean_pool,
    mean_rows,
    mul,
    pointwise,
    relu,
    row,
    scale,
    sigmoid,
    softmax,
    softmax_array,
    softmax_cross_entropy_rows,
    stack,
    tanh,
    total,
)

__all__ = [
    "HAS_EXTENSION",
    "Parameter",
    "ShapeError",
    "Tape",
    "Tensor",
    "add",
    "as_tensor",
    "backend_name",
    "concat",
    "cross_entropy",
    "cross_entropy_l2",
    "dropout",
    "hstack",
    "init_tensor",
    "l2_penalty",
    "log_softmax_array",
    "lstm_sequence",
    "matmul",
    "mean_pool",
    "mean_rows",
    "mul",
    "pointwise",
    "relu",
    "row",
    "scale",
    "set_backend",
    "sgd_momentum_step",
    "sigmoid",
    "softmax",
    "softmax_array",
    "softmax_cross_entropy_rows",
    "stack",
    "stream",
    "tanh",
    "total",
    "zero_grad",
]
