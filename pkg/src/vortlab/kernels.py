"""Hot loops, each in a numba and a pure-numpy flavour.

The public names (``image_kernel_table``, ``sin_theta_pairs``, ``pair_scan``,
``direct_sum_loop``) are bound at import time according to
``vortlab._accel.USE_NUMBA``.  The ``*_numpy`` / ``*_numba`` variants stay
importable so tests and ``benchmarks/bench_kernels.py`` can compare them.
Both flavours run serially and are deterministic.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit


def _nearest_image_offsets(n: int) -> np.ndarray:
    i = np.arange(n)
    return np.where(i <= n // 2, i, i - n)


# --------------------------------------------------------------------------
# Riesz kernel table: sum over periodic images of h^3 |d + l m|^(beta - 3)


def image_kernel_table_numpy(n, h, l, beta, images):
    d = _nearest_image_offsets(n) * h
    dx = d[:, None, None]
    dy = d[None, :, None]
    dz = d[None, None, :]
    table = np.zeros((n, n, n))
    p = 0.5 * (beta - 3.0)
    for mx in range(-images, images + 1):
        for my in range(-images, images + 1):
            for mz in range(-images, images + 1):
                r2 = (dx + mx * l) ** 2 + (dy + my * l) ** 2 + (dz + mz * l) ** 2
                if mx == 0 and my == 0 and mz == 0:
                    r2 = r2.copy()
                    r2[0, 0, 0] = np.inf
                table += r2**p
    return table * h**3


def _image_kernel_table_loop(n, h, l, beta, images):
    table = np.zeros((n, n, n))
    p = 0.5 * (beta - 3.0)
    for i in range(n):
        dx = (i if i <= n // 2 else i - n) * h
        for j in range(n):
            dy = (j if j <= n // 2 else j - n) * h
            for k in range(n):
                dz = (k if k <= n // 2 else k - n) * h
                acc = 0.0
                for mx in range(-images, images + 1):
                    ex = (dx + mx * l) ** 2
                    for my in range(-images, images + 1):
                        ey = (dy + my * l) ** 2
                        for mz in range(-images, images + 1):
                            r2 = ex + ey + (dz + mz * l) ** 2
                            if r2 > 0.0:
                                acc += r2**p
                table[i, j, k] = acc
    return table * h**3


image_kernel_table_numba = njit(_image_kernel_table_loop)


# --------------------------------------------------------------------------
# sin(angle) between unit vectors at index pairs


def sin_theta_pairs_numpy(d, a, b):
    ax, ay, az = d[0, a], d[1, a], d[2, a]
    bx, by, bz = d[0, b], d[1, b], d[2, b]
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    return np.minimum(np.sqrt(cx * cx + cy * cy + cz * cz), 1.0)


def _sin_theta_pairs_loop(d, a, b):
    out = np.empty(a.shape[0])
    for p in range(a.shape[0]):
        i = a[p]
        j = b[p]
        cx = d[1, i] * d[2, j] - d[2, i] * d[1, j]
        cy = d[2, i] * d[0, j] - d[0, i] * d[2, j]
        cz = d[0, i] * d[1, j] - d[1, i] * d[0, j]
        s = np.sqrt(cx * cx + cy * cy + cz * cz)
        out[p] = s if s < 1.0 else 1.0
    return out


sin_theta_pairs_numba = njit(_sin_theta_pairs_loop)


# --------------------------------------------------------------------------
# Exhaustive scan over all (point, offset) pairs


def pair_scan_numpy(d, valid, n, offsets, offset_bin, n_bins, edges):
    """Per separation bin: sup of sin(theta), histogram over ``edges``, and
    per-offset count of pairs whose endpoints are both valid."""
    n_hist = edges.shape[0] + 1
    sup = np.zeros(n_bins)
    hist = np.zeros((n_bins, n_hist), dtype=np.int64)
    per_offset = np.zeros(offsets.shape[0], dtype=np.int64)
    vecs = d.reshape(3, n, n, n)
    vmask = valid.reshape(n, n, n)
    for m in range(offsets.shape[0]):
        shift = (-int(offsets[m, 0]), -int(offsets[m, 1]), -int(offsets[m, 2]))
        other = np.roll(vecs, shift, axis=(1, 2, 3))
        both = vmask & np.roll(vmask, shift, axis=(0, 1, 2))
        if not both.any():
            continue
        u = vecs[:, both]
        w = other[:, both]
        c = np.cross(u, w, axis=0)
        s = np.minimum(np.sqrt(np.einsum("ij,ij->j", c, c)), 1.0)
        b = offset_bin[m]
        sup[b] = max(sup[b], s.max())
        hist[b] += np.bincount(np.searchsorted(edges, s, side="right"), minlength=n_hist)
        per_offset[m] = s.size
    return sup, hist, per_offset


def _pair_scan_loop(d, valid, n, offsets, offset_bin, n_bins, edges):
    n_hist = edges.shape[0] + 1
    sup = np.zeros(n_bins)
    hist = np.zeros((n_bins, n_hist), dtype=np.int64)
    per_offset = np.zeros(offsets.shape[0], dtype=np.int64)
    for m in range(offsets.shape[0]):
        ox = offsets[m, 0]
        oy = offsets[m, 1]
        oz = offsets[m, 2]
        b = offset_bin[m]
        cnt = 0
        for i in range(n):
            i2 = (i + ox) % n
            for j in range(n):
                j2 = (j + oy) % n
                for k in range(n):
                    p = (i * n + j) * n + k
                    if not valid[p]:
                        continue
                    q = (i2 * n + j2) * n + (k + oz) % n
                    if not valid[q]:
                        continue
                    cx = d[1, p] * d[2, q] - d[2, p] * d[1, q]
                    cy = d[2, p] * d[0, q] - d[0, p] * d[2, q]
                    cz = d[0, p] * d[1, q] - d[1, p] * d[0, q]
                    s = np.sqrt(cx * cx + cy * cy + cz * cz)
                    if s > 1.0:
                        s = 1.0
                    if s > sup[b]:
                        sup[b] = s
                    hist[b, np.searchsorted(edges, s, side="right")] += 1
                    cnt += 1
        per_offset[m] = cnt
    return sup, hist, per_offset


pair_scan_numba = njit(_pair_scan_loop)


# --------------------------------------------------------------------------
# Literal O(N^2) circular sum  I[x] = sum_y f[y] G[(x - y) mod n]


def direct_sum_loop_numpy(f, table):
    n = f.shape[0]
    out = np.empty_like(f)
    # G[(x - y) mod n] over y equals the point-reflected table rolled by x
    refl = np.roll(table[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j, k] = np.sum(f * np.roll(refl, (i, j, k), axis=(0, 1, 2)))
    return out


def _direct_sum_loop(f, table):
    n = f.shape[0]
    out = np.zeros_like(f)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = 0.0
                for a in range(n):
                    ia = (i - a) % n
                    for b in range(n):
                        jb = (j - b) % n
                        for c in range(n):
                            acc += f[a, b, c] * table[ia, jb, (k - c) % n]
                out[i, j, k] = acc
    return out


direct_sum_loop_numba = njit(_direct_sum_loop)


if USE_NUMBA:
    image_kernel_table = image_kernel_table_numba
    sin_theta_pairs = sin_theta_pairs_numba
    pair_scan = pair_scan_numba
    direct_sum_loop = direct_sum_loop_numba
else:
    image_kernel_table = image_kernel_table_numpy
    sin_theta_pairs = sin_theta_pairs_numpy
    pair_scan = pair_scan_numpy
    direct_sum_loop = direct_sum_loop_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
