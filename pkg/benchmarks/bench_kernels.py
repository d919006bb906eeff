"""Time the compiled kernels against the numpy fallback on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py``; prints one row per kernel.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hofa import _fallback
from hofa.group import make_group

try:
    from hofa import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(rng):
    g = make_group([9])
    add = g.add_table
    k = 4
    vals = np.exp(2j * np.pi * rng.random((1 << k, g.order)))
    yield "conv_table Z_9 k=4", lambda m: m.conv_table(vals, add, k)
    g2 = make_group([2, 6])
    vals2 = np.exp(2j * np.pi * rng.random((1 << k, g2.order)))
    yield "conv_mean Z_2xZ_6 k=4", lambda m: m.conv_mean(vals2, g2.add_table, k)
    g3 = make_group([40])
    x = np.arange(40, dtype=np.int64)
    ang = (x * x) % 80
    t = np.arange(40, dtype=np.int64)
    yield "degree_violation Z_40 d=2", lambda m: m.degree_violation(ang, 80, g3.add_table, 3, t)
    g4 = make_group([4])
    tab = g4.character_angle_table.astype(np.int32)
    yield "character_system_norms Z_4 d=3", lambda m: m.character_system_norms(tab, g4.add_table, 3, 4)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'numpy (s)':>12s} {'cython (s)':>12s} {'speedup':>8s}")
    for name, run in cases(rng):
        tn, ref = _best(lambda: run(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:36s} {tn:12.4f} {'n/a':>12s} {'':>8s}")
            continue
        tc, out = _best(lambda: run(_kernels), args.repeat)
        if isinstance(ref, np.ndarray):
            assert np.allclose(ref, out, atol=1e-10), name
        else:
            assert ref == out or np.allclose(ref, out), name
        print(f"{name:36s} {tn:12.4f} {tc:12.4f} {tn / tc:7.1f}x")


if __name__ == "__main__":
    main()
