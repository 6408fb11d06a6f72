# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM recurrence. Same contract as ``_lstm_python``.

The recurrent matvec and the weight-gradient outer product go through BLAS;
everything else is a plain C loop over the hidden units.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh
from scipy.linalg.cython_blas cimport dgemv, dger

cnp.import_array()


cdef inline double _sig(double z) nogil:
    return 0.5 * (1.0 + tanh(0.5 * z))


def lstm_forward(double[:, ::1] gx, double[:, ::1] wh, bint reverse=False):
    cdef int T = gx.shape[0]
    cdef int four_d = gx.shape[1]
    cdef int d = four_d // 4
    h_arr = np.zeros((T, d))
    c_arr = np.zeros((T, d))
    g_arr = np.zeros((T, four_d))
    z_arr = np.zeros(four_d)
    zero_arr = np.zeros(d)
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] gates = g_arr
    cdef double[::1] z = z_arr
    cdef double[::1] zero = zero_arr
    cdef double *h_prev = &zero[0] if d > 0 else NULL
    cdef double *c_prev = &zero[0] if d > 0 else NULL
    cdef int step, t, k, inc = 1
    cdef double one = 1.0, beta = 1.0
    cdef char trans = b'T'
    cdef double ig, fg, og, gg
    if T == 0 or d == 0:
        return h_arr, c_arr, g_arr
    with nogil:
        for step in range(T):
            t = T - 1 - step if reverse else step
            for k in range(four_d):
                z[k] = gx[t, k]
            # z += wh @ h_prev; wh is (4d, d) row-major == (d, 4d) column-major
            dgemv(&trans, &d, &four_d, &one, &wh[0, 0], &d, h_prev, &inc, &beta, &z[0], &inc)
            for k in range(d):
                ig = _sig(z[k])
                fg = _sig(z[d + k])
                og = _sig(z[2 * d + k])
                gg = tanh(z[3 * d + k])
                gates[t, k] = ig
                gates[t, d + k] = fg
                gates[t, 2 * d + k] = og
                gates[t, 3 * d + k] = gg
                c[t, k] = fg * c_prev[k] + ig * gg
                h[t, k] = og * tanh(c[t, k])
            h_prev = &h[t, 0]
            c_prev = &c[t, 0]
    return h_arr, c_arr, g_arr


def lstm_backward(double[:, ::1] dh, double[:, ::1] h, double[:, ::1] c,
                  double[:, ::1] gates, double[:, ::1] wh, bint reverse=False):
    cdef int T = h.shape[0]
    cdef int d = h.shape[1]
    cdef int four_d = 4 * d
    dgx_arr = np.zeros((T, four_d))
    dwh_arr = np.zeros((four_d, d))
    if T == 0 or d == 0:
        return dgx_arr, dwh_arr
    dh_rec_arr = np.zeros(d)
    dc_rec_arr = np.zeros(d)
    zero_arr = np.zeros(d)
    cdef double[:, ::1] dgx = dgx_arr
    cdef double[:, ::1] dwh = dwh_arr
    cdef double[::1] dh_rec = dh_rec_arr
    cdef double[::1] dc_rec = dc_rec_arr
    cdef double[::1] zero = zero_arr
    cdef double *h_prev
    cdef double *c_prev
    cdef int step, t, prev, k, inc = 1
    cdef double one = 1.0, nil = 0.0
    cdef char notrans = b'N'
    cdef double ig, fg, og, gg, tc, dht, dc
    with nogil:
        for step in range(T):
            t = step if reverse else T - 1 - step
            prev = t + 1 if reverse else t - 1
            if 0 <= prev < T:
                h_prev = &h[prev, 0]
                c_prev = &c[prev, 0]
            else:
                h_prev = &zero[0]
                c_prev = &zero[0]
            for k in range(d):
                ig = gates[t, k]
                fg = gates[t, d + k]
                og = gates[t, 2 * d + k]
                gg = gates[t, 3 * d + k]
                dht = dh[t, k] + dh_rec[k]
                tc = tanh(c[t, k])
                dc = dc_rec[k] + dht * og * (1.0 - tc * tc)
                dgx[t, k] = dc * gg * ig * (1.0 - ig)
                dgx[t, d + k] = dc * c_prev[k] * fg * (1.0 - fg)
                dgx[t, 2 * d + k] = dht * tc * og * (1.0 - og)
                dgx[t, 3 * d + k] = dc * ig * (1.0 - gg * gg)
                dc_rec[k] = dc * fg
            # dwh += outer(dz, h_prev)
            dger(&d, &four_d, &one, h_prev, &inc, &dgx[t, 0], &inc, &dwh[0, 0], &d)
            # dh_rec = wh.T @ dz
            dgemv(&notrans, &d, &four_d, &one, &wh[0, 0], &d, &dgx[t, 0], &inc, &nil, &dh_rec[0], &inc)
    return dgx_arr, dwh_arr
