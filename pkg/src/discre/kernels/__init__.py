"""LSTM recurrence kernels: compiled extension with a pure-numpy fallback.

The compiled kernel removes per-step interpreter overhead and wins heavily at
small hidden sizes; at large hidden sizes the numpy fallback wins because its
per-step matvec goes through BLAS.  In the default ``auto`` mode the compiled
kernel therefore handles sequences with hidden size <= CYTHON_MAX_HIDDEN and
numpy handles the rest (see benchmarks/bench_kernels.py for the crossover).

Set ``DISCRE_KERNEL=python`` to force the fallback everywhere, or
``DISCRE_KERNEL=cython`` to force the extension everywhere (raising when it
was not built).
"""

import os

from . import _lstm_np

CYTHON_MAX_HIDDEN = 96

_mode = os.environ.get("DISCRE_KERNEL", "auto")
_compiled = None
if _mode in ("auto", "cython"):
    try:
        from . import _lstm_cy as _compiled
    except ImportError:
        if _mode == "cython":
            raise

if _compiled is None:
    BACKEND = "python"

    lstm_forward = _lstm_np.lstm_forward
    lstm_backward = _lstm_np.lstm_backward
elif _mode == "cython":
    BACKEND = "cython"

    lstm_forward = _compiled.lstm_forward
    lstm_backward = _compiled.lstm_backward
else:
    BACKEND = "cython"
    _fast = _compiled

    def lstm_forward(z_pre, w_h):
        impl = _fast if w_h.shape[1] <= CYTHON_MAX_HIDDEN else _lstm_np
        return impl.lstm_forward(z_pre, w_h)

    def lstm_backward(dh_out, w_h, h, c, gates):
        impl = _fast if w_h.shape[1] <= CYTHON_MAX_HIDDEN else _lstm_np
        return impl.lstm_backward(dh_out, w_h, h, c, gates)


def backend_name() -> str:
    """Name of the active kernel backend ('cython' or 'python')."""
    return BACKEND
