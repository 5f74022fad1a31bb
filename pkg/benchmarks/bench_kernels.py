#!/usr/bin/env python3
"""Benchmark the LSTM recurrence kernels: compiled extension vs numpy fallback.

Times one forward+backward pass over a single sequence for several
(sequence length, hidden size) shapes. The compiled kernel matters most at
small hidden sizes, where per-step interpreter overhead dominates the math.

Usage: python benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from discre.kernels import _lstm_np

try:
    from discre.kernels import _lstm_cy
except ImportError:
    _lstm_cy = None

SHAPES = [(8, 8), (16, 16), (16, 64), (32, 128), (64, 200)]


def time_backend(impl, seq_len, hidden, repeats):
    rng = np.random.default_rng(0)
    z_pre = np.ascontiguousarray(rng.normal(size=(seq_len, 4 * hidden)))
    w_h = np.ascontiguousarray(rng.normal(size=(4 * hidden, hidden)) * 0.2)
    d_h = np.ascontiguousarray(rng.normal(size=(seq_len, hidden)))
    h, c, g = impl.lstm_forward(z_pre, w_h)  # warmup
    impl.lstm_backward(d_h, w_h, h, c, g)
    start = time.perf_counter()
    for _ in range(repeats):
        h, c, g = impl.lstm_forward(z_pre, w_h)
        impl.lstm_backward(d_h, w_h, h, c, g)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    if _lstm_cy is None:
        print("compiled kernel not built; timing the numpy fallback only\n")
    print(f"{'T':>4} {'H':>4} {'numpy (us)':>12} {'cython (us)':>12} {'speedup':>8}")
    for seq_len, hidden in SHAPES:
        numpy_time = time_backend(_lstm_np, seq_len, hidden, args.repeats)
        row = f"{seq_len:>4} {hidden:>4} {numpy_time * 1e6:>12.1f}"
        if _lstm_cy is not None:
            cython_time = time_backend(_lstm_cy, seq_len, hidden, args.repeats)
            row += f" {cython_time * 1e6:>12.1f} {numpy_time / cython_time:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
