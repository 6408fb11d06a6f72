"""Single-direction LSTM over a whole sequence, recorded as one tape op."""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import Tensor, ShapeError, _push, _result, as_tensor


def lstm_sequence(x: Tensor, wx: Tensor, wh: Tensor, b: Tensor, reverse: bool = False, backend: str | None = None) -> Tensor:
    """Run an LSTM over the rows of ``x`` (T, n_in) and return hidden states (T, d).

    ``wx`` is (4d, n_in), ``wh`` is (4d, d) and ``b`` is (4d,), gates stacked as
    (input, forget, output, candidate). ``reverse`` processes the rows last to
    first while keeping the output aligned with the input rows.
    """
    x, wx, wh, b = (as_tensor(t) for t in (x, wx, wh, b))
    four_d, d = wh.shape
    if four_d != 4 * d or wx.shape[0] != four_d or b.shape != (four_d,):
        raise ShapeError(f"inconsistent LSTM weights: wx {wx.shape}, wh {wh.shape}, b {b.shape}")
    if x.data.ndim != 2 or x.shape[1] != wx.shape[1]:
        raise ShapeError(f"LSTM input {x.shape} does not match wx {wx.shape}")
    kern = kernels.get_backend(backend)
    X = x.data
    gx = np.ascontiguousarray(X @ wx.data.T + b.data)
    WH = np.ascontiguousarray(wh.data)
    h, c, gates = kern.lstm_forward(gx, WH, reverse)

    def backward(g):
        dgx, dwh = kern.lstm_backward(np.ascontiguousarray(g), h, c, gates, WH, reverse)
        _push(wh, dwh)
        _push(wx, dgx.T @ X)
        _push(b, dgx.sum(axis=0))
        _push(x, dgx @ wx.data)

    return _result(h, (x, wx, wh, b), backward)
