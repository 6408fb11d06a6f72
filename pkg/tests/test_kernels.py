import numpy as np
import pytest

from fd import numeric_grad, rel_error
from rotprobe import numerics as nx
from rotprobe.numerics import Parameter, Tape, Tensor, kernels

BACKENDS = sorted(kernels.BACKENDS)


def _weights(n_in, d, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(5, n_in)), rng.uniform(-0.5, 0.5, (4 * d, n_in)), rng.uniform(-0.5, 0.5, (4 * d, d)), rng.normal(size=4 * d) * 0.1


def test_fallback_always_present():
    assert "python" in kernels.BACKENDS
    assert kernels.backend_name() in kernels.BACKENDS


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


@pytest.mark.skipif(not kernels.HAS_EXTENSION, reason="compiled kernel not built")
@pytest.mark.parametrize("reverse", [False, True])
@pytest.mark.parametrize("T,d", [(1, 1), (3, 4), (17, 9)])
def test_compiled_matches_python(T, d, reverse):
    rng = np.random.default_rng(T * 100 + d)
    gx = rng.normal(size=(T, 4 * d))
    wh = rng.normal(size=(4 * d, d)) * 0.3
    dh = rng.normal(size=(T, d))
    py, ext = kernels.BACKENDS["python"], kernels.BACKENDS["compiled"]
    fp, fe = py.lstm_forward(gx, wh, reverse), ext.lstm_forward(gx, wh, reverse)
    for a, b in zip(fp, fe):
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
    bp, be = py.lstm_backward(dh, *fp, wh, reverse), ext.lstm_backward(dh, *fe, wh, reverse)
    for a, b in zip(bp, be):
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_single_step_by_hand():
    # d=1, one input: z = wx*x + b (no recurrence at t=0)
    wx = np.array([[0.5], [-0.3], [0.8], [0.2]])
    b = np.array([0.1, 1.0, 0.0, -0.1])
    x = np.array([[2.0]])
    z = wx[:, 0] * 2.0 + b
    sig = lambda v: 1 / (1 + np.exp(-v))  # noqa: E731
    i, _, o, g = sig(z[0]), sig(z[1]), sig(z[2]), np.tanh(z[3])
    c = i * g  # c_prev = 0, so the forget gate drops out
    h = o * np.tanh(c)
    for name in BACKENDS:
        out = nx.lstm_sequence(Tensor(x), Tensor(wx), Tensor(np.zeros((4, 1))), Tensor(b), backend=name)
        assert out.data[0, 0] == pytest.approx(h, abs=1e-15)


def test_reverse_aligns_with_input_rows():
    x, wx, wh, b = _weights(3, 2)
    fwd = nx.lstm_sequence(Tensor(x[::-1].copy()), Tensor(wx), Tensor(wh), Tensor(b)).data
    rev = nx.lstm_sequence(Tensor(x), Tensor(wx), Tensor(wh), Tensor(b), reverse=True).data
    np.testing.assert_allclose(rev, fwd[::-1], atol=1e-14)


def test_shape_errors():
    x, wx, wh, b = _weights(3, 2)
    with pytest.raises(nx.ShapeError):
        nx.lstm_sequence(Tensor(x), Tensor(wx), Tensor(wh[:7]), Tensor(b))
    with pytest.raises(nx.ShapeError):
        nx.lstm_sequence(Tensor(x[:, :2]), Tensor(wx), Tensor(wh), Tensor(b))


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("reverse", [False, True])
def test_lstm_sequence_grad(backend, reverse):
    arrays_ = _weights(3, 2, seed=4)
    leaves = [Parameter(a) for a in arrays_]
    w = np.random.default_rng(9).normal(size=(5, 2))

    def objective():
        return float(np.sum(w * nx.lstm_sequence(*[Tensor(p.data) for p in leaves], reverse=reverse, backend=backend).data))

    with Tape() as tape:
        out = nx.lstm_sequence(*leaves, reverse=reverse, backend=backend)
        loss = nx.total(nx.mul(out, Tensor(w)))
    tape.backward(loss)
    for p in leaves:
        assert rel_error(p.gradient, numeric_grad(objective, p.data)) < 1e-4
