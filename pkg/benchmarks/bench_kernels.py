"""Time the numba and pure-numpy flavours of each hot kernel.

    python3 benchmarks/bench_kernels.py [--n 16] [--repeat 3]

Numba timings exclude the first (compiling) call.  Each row also reports
the max relative difference between the two outputs.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from vortlab import diagnostics as dg
from vortlab import kernels
from vortlab import synthetic as sy
from vortlab._accel import HAVE_NUMBA
from vortlab.fields import GridSpec


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def rel_diff(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def cases(n):
    grid = GridSpec(n)
    h, l = grid.h, grid.l
    rng = np.random.default_rng(0)

    yield "image_kernel_table", (n, h, l, 0.5, 2)

    om = sy.direction_field(grid, sy.rough_angle(grid, seed=0))
    d = np.ascontiguousarray(om.data.reshape(3, -1))
    m = 200_000
    a = rng.integers(0, grid.size, m)
    b = rng.integers(0, grid.size, m)
    yield "sin_theta_pairs", (d, a, b)

    valid = np.ones(grid.size, dtype=bool)
    offsets, seps = dg.lattice_offsets(grid, l / 6)
    edges = np.geomspace(h, l / 6, 13)
    obin = np.clip(np.searchsorted(edges, seps * (1 - 1e-12), side="right") - 1, 0, 11).astype(np.int64)
    yield "pair_scan", (d, valid, n, offsets, obin, 12, np.geomspace(1e-12, 1.0, 4001))

    small = max(n // 2, 4)
    f = rng.standard_normal((small, small, small))
    yield "direct_sum_loop", (f, kernels.image_kernel_table_numpy(small, l / small, l, 0.5, 1))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run")
    print(f"{'kernel':<20} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'rel diff':>9}")
    for name, call in cases(args.n):
        np_fn = getattr(kernels, f"{name}_numpy")
        t_np, out_np = best_of(lambda: np_fn(*call), args.repeat)
        if HAVE_NUMBA:
            nb_fn = getattr(kernels, f"{name}_numba")
            nb_fn(*call)  # compile
            t_nb, out_nb = best_of(lambda: nb_fn(*call), args.repeat)
            if isinstance(out_np, tuple):
                diff = max(rel_diff(x, y) for x, y in zip(out_nb, out_np))
            else:
                diff = rel_diff(out_nb, out_np)
            print(f"{name:<20} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:9.1e}")
        else:
            print(f"{name:<20} {t_np:10.4f} {'-':>10} {'-':>8} {'-':>9}")


if __name__ == "__main__":
    main()
