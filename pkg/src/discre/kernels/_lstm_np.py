"""Pure-numpy LSTM sequence kernel (fallback when the compiled one is absent).

Both backends share the same contract.  The input projection of the whole
sequence (``x @ w_x.T + b``) is precomputed by the caller with one BLAS GEMM;
the kernel only runs the sequential recurrence, which is the part that cannot
be batched.

Gate layout inside every length-4H vector is ``[input | forget | cell | output]``.
"""

import numpy as np

BACKEND = "python"


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_forward(z_pre, w_h):
    """Run an LSTM over a precomputed input projection.

    z_pre: (T, 4H) array, x_t @ w_x.T + b for every step.
    w_h:   (4H, H) recurrent weights.

    Returns (h, c, gates): hidden states (T, H), cell states (T, H) and the
    post-activation gate values (T, 4H) needed by :func:`lstm_backward`.
    """
    T, H4 = z_pre.shape
    H = H4 // 4
    h = np.zeros((T, H))
    c = np.zeros((T, H))
    gates = np.empty((T, H4))
    h_prev = np.zeros(H)
    c_prev = np.zeros(H)
    for t in range(T):
        z = z_pre[t] + w_h @ h_prev
        i = _sigmoid(z[:H])
        f = _sigmoid(z[H : 2 * H])
        g = np.tanh(z[2 * H : 3 * H])
        o = _sigmoid(z[3 * H :])
        c_t = f * c_prev + i * g
        h_t = o * np.tanh(c_t)
        gates[t, :H] = i
        gates[t, H : 2 * H] = f
        gates[t, 2 * H : 3 * H] = g
        gates[t, 3 * H :] = o
        c[t] = c_t
        h[t] = h_t
        h_prev = h_t
        c_prev = c_t
    return h, c, gates


def lstm_backward(dh_out, w_h, h, c, gates):
    """Backpropagate through the recurrence.

    dh_out: (T, H) upstream gradients on every hidden state.

    Returns dz: (T, 4H), the gradient w.r.t. ``z_pre``.  The caller recovers
    the weight gradients with GEMMs: ``dw_x = dz.T @ x``, ``db = dz.sum(0)``,
    ``dw_h = dz[1:].T @ h[:-1]`` and ``dx = dz @ w_x``.
    """
    T, H = dh_out.shape
    dz = np.zeros((T, 4 * H))
    dh_carry = np.zeros(H)
    dc_carry = np.zeros(H)
    for t in range(T - 1, -1, -1):
        i = gates[t, :H]
        f = gates[t, H : 2 * H]
        g = gates[t, 2 * H : 3 * H]
        o = gates[t, 3 * H :]
        tc = np.tanh(c[t])
        dh = dh_out[t] + dh_carry
        do = dh * tc
        dc = dc_carry + dh * o * (1.0 - tc * tc)
        c_prev = c[t - 1] if t > 0 else np.zeros(H)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz[t, :H] = di * i * (1.0 - i)
        dz[t, H : 2 * H] = df * f * (1.0 - f)
        dz[t, 2 * H : 3 * H] = dg * (1.0 - g * g)
        dz[t, 3 * H :] = do * o * (1.0 - o)
        dc_carry = dc * f
        dh_carry = w_h.T @ dz[t]
    return dz
