# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM sequence kernel.

Same contract as ``_lstm_np``: the caller precomputes the input projection
with a GEMM; this module runs only the sequential recurrence.  Gate layout
is ``[input | forget | cell | output]``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

BACKEND = "cython"


cdef inline double _sigmoid(double x) noexcept nogil:
    return 1.0 / (1.0 + exp(-x))


def lstm_forward(double[:, ::1] z_pre, double[:, ::1] w_h):
    cdef Py_ssize_t T = z_pre.shape[0]
    cdef Py_ssize_t H4 = z_pre.shape[1]
    cdef Py_ssize_t H = H4 // 4
    h_arr = np.zeros((T, H))
    c_arr = np.zeros((T, H))
    g_arr = np.empty((T, H4))
    z_arr = np.empty(H4)
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] gates = g_arr
    cdef double[::1] z = z_arr
    cdef Py_ssize_t t, j, k
    cdef double acc, iv, fv, gv, ov, cc, c_prev
    with nogil:
        for t in range(T):
            for j in range(H4):
                acc = z_pre[t, j]
                if t > 0:
                    for k in range(H):
                        acc += w_h[j, k] * h[t - 1, k]
                z[j] = acc
            for k in range(H):
                iv = _sigmoid(z[k])
                fv = _sigmoid(z[H + k])
                gv = tanh(z[2 * H + k])
                ov = _sigmoid(z[3 * H + k])
                c_prev = c[t - 1, k] if t > 0 else 0.0
                cc = fv * c_prev + iv * gv
                c[t, k] = cc
                h[t, k] = ov * tanh(cc)
                gates[t, k] = iv
                gates[t, H + k] = fv
                gates[t, 2 * H + k] = gv
                gates[t, 3 * H + k] = ov
    return h_arr, c_arr, g_arr


def lstm_backward(double[:, ::1] dh_out, double[:, ::1] w_h,
                  double[:, ::1] h, double[:, ::1] c, double[:, ::1] gates):
    cdef Py_ssize_t T = dh_out.shape[0]
    cdef Py_ssize_t H = dh_out.shape[1]
    cdef Py_ssize_t H4 = 4 * H
    dz_arr = np.zeros((T, H4))
    dh_arr = np.zeros(H)
    dc_arr = np.zeros(H)
    cdef double[:, ::1] dz = dz_arr
    cdef double[::1] dh_carry = dh_arr
    cdef double[::1] dc_carry = dc_arr
    cdef Py_ssize_t t, j, k
    cdef double iv, fv, gv, ov, tc, dh, dc, c_prev, di, df, dg, do, dzj
    with nogil:
        for t in range(T - 1, -1, -1):
            for k in range(H):
                iv = gates[t, k]
                fv = gates[t, H + k]
                gv = gates[t, 2 * H + k]
                ov = gates[t, 3 * H + k]
                tc = tanh(c[t, k])
                dh = dh_out[t, k] + dh_carry[k]
                do = dh * tc
                dc = dc_carry[k] + dh * ov * (1.0 - tc * tc)
                c_prev = c[t - 1, k] if t > 0 else 0.0
                di = dc * gv
                df = dc * c_prev
                dg = dc * iv
                dz[t, k] = di * iv * (1.0 - iv)
                dz[t, H + k] = df * fv * (1.0 - fv)
                dz[t, 2 * H + k] = dg * (1.0 - gv * gv)
                dz[t, 3 * H + k] = do * ov * (1.0 - ov)
                dc_carry[k] = dc * fv
            for k in range(H):
                dh_carry[k] = 0.0
            for j in range(H4):
                dzj = dz[t, j]
                if dzj != 0.0:
                    for k in range(H):
                        dh_carry[k] += w_h[j, k] * dzj
    return dz_arr
