"""Pure numpy LSTM recurrence, the fallback when the compiled kernel is absent.

Gate layout along the 4d axis is (input, forget, output, candidate). The input
projection ``gx = x @ Wx.T + b`` is computed by the caller; only the sequential
part lives here.
"""

import numpy as np


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def lstm_forward(gx, wh, reverse=False):
    T, four_d = gx.shape
    d = four_d // 4
    h = np.zeros((T, d))
    c = np.zeros((T, d))
    gates = np.zeros((T, four_d))
    h_prev = np.zeros(d)
    c_prev = np.zeros(d)
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        z = gx[t] + wh @ h_prev
        act = gates[t]
        act[: 3 * d] = _sigmoid(z[: 3 * d])
        act[3 * d :] = np.tanh(z[3 * d :])
        i, f, o, g = act[:d], act[d : 2 * d], act[2 * d : 3 * d], act[3 * d :]
        c[t] = f * c_prev + i * g
        h[t] = o * np.tanh(c[t])
        h_prev, c_prev = h[t], c[t]
    return h, c, gates


def lstm_backward(dh, h, c, gates, wh, reverse=False):
    T, d = h.shape
    dgx = np.zeros((T, 4 * d))
    dwh = np.zeros_like(wh)
    dh_rec = np.zeros(d)
    dc_rec = np.zeros(d)
    zeros = np.zeros(d)
    # walk back against the direction the forward pass ran
    steps = range(T) if reverse else range(T - 1, -1, -1)
    for t in steps:
        prev = t + 1 if reverse else t - 1
        if 0 <= prev < T:
            h_prev, c_prev = h[prev], c[prev]
        else:
            h_prev, c_prev = zeros, zeros
        act = gates[t]
        i, f, o, g = act[:d], act[d : 2 * d], act[2 * d : 3 * d], act[3 * d :]
        dht = dh[t] + dh_rec
        tc = np.tanh(c[t])
        dc = dc_rec + dht * o * (1.0 - tc * tc)
        dz = dgx[t]
        dz[:d] = dc * g * i * (1.0 - i)
        dz[d : 2 * d] = dc * c_prev * f * (1.0 - f)
        dz[2 * d : 3 * d] = dht * tc * o * (1.0 - o)
        dz[3 * d :] = dc * i * (1.0 - g * g)
        dc_rec = dc * f
        dwh += np.outer(dz, h_prev)
        dh_rec = wh.T @ dz
    return dgx, dwh
