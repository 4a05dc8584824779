"""Synthetic fields with known structure, used by tests and `verify`."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import spectral_ops as so
from .fields import GridSpec, ScalarField, VectorField


def direction_field(grid: GridSpec, angle: np.ndarray, magnitude: Optional[np.ndarray] = None) -> VectorField:
    """``magnitude * (cos g, sin g, 0)`` for an angle field ``g``."""
    mag = np.ones(grid.shape) if magnitude is None else np.asarray(magnitude)
    return VectorField(grid, np.stack([mag * np.cos(angle), mag * np.sin(angle), np.zeros(grid.shape)]))


def smooth_angle(grid: GridSpec) -> np.ndarray:
    """``g = sin(2 pi x / l)``: a Lipschitz direction field."""
    x, _, _ = grid.mesh()
    return np.sin(2.0 * math.pi * x / grid.l)


def rough_angle(grid: GridSpec, hurst: float = 0.5, amplitude: float = 0.2, seed: int = 0) -> np.ndarray:
    """Isotropic Gaussian field with increments scaling like ``|x - y|^hurst``.

    Mode amplitudes fall as ``|k|^-(hurst + 3/2)`` for ``0 < |k| < n/2``
    (a fractional Brownian field on the torus); the result has standard
    deviation ``amplitude`` so that the angle stays small.
    """
    n = grid.n
    k = np.fft.fftfreq(n, 1.0 / n)
    kz = np.fft.rfftfreq(n, 1.0 / n)
    kx, ky, kzz = np.meshgrid(k, k, kz, indexing="ij")
    kk = np.sqrt(kx**2 + ky**2 + kzz**2)
    amp = np.zeros_like(kk)
    m = (kk > 0) & (kk < n / 2)
    amp[m] = kk[m] ** -(hurst + 1.5)
    rng = np.random.default_rng(seed)
    c = (rng.normal(size=kk.shape) + 1j * rng.normal(size=kk.shape)) * amp
    g = np.fft.irfftn(c, s=grid.shape, axes=(0, 1, 2))
    return amplitude * g / g.std()


def constant_direction_field(grid: GridSpec, seed: int = 0) -> VectorField:
    """Vorticity parallel to ``e_z`` with positive, varying magnitude."""
    mag = 1.0 + 0.5 * band_limited_scalar(grid, kmax=2, seed=seed).values
    mag = np.maximum(mag, 0.1)
    return VectorField(grid, np.stack([np.zeros(grid.shape), np.zeros(grid.shape), mag]))


def _band_limited(grid: GridSpec, shape: tuple, kmax: int, rng) -> np.ndarray:
    n = grid.n
    if not 0 <= kmax < n // 2:
        raise ValueError(f"kmax must lie in [0, n/2), got {kmax}")
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    kz = np.fft.rfftfreq(n, 1.0 / n)
    mask = (k[:, None, None] <= kmax) & (k[None, :, None] <= kmax) & (kz[None, None, :] <= kmax)
    noise = so.forward(rng.standard_normal(shape + grid.shape))
    out = so.inverse(noise * mask, grid)
    return out / np.abs(out).max()


def band_limited_scalar(grid: GridSpec, kmax: int = 2, seed: int = 0) -> ScalarField:
    """Random smooth scalar with modes ``|k_i| <= kmax``, peak-normalised."""
    return ScalarField(grid, _band_limited(grid, (), kmax, np.random.default_rng(seed)))


def band_limited_vector(grid: GridSpec, kmax: int = 2, seed: int = 0) -> VectorField:
    return VectorField(grid, _band_limited(grid, (3,), kmax, np.random.default_rng(seed)))


def band_limited_velocity(grid: GridSpec, kmax: int = 2, seed: int = 0) -> VectorField:
    """Divergence-free, mean-free band-limited velocity."""
    u = so.leray_project(band_limited_vector(grid, kmax, seed)).data
    return VectorField(grid, u - u.mean(axis=(1, 2, 3), keepdims=True))


class TrigVectorField:
    """Random real trigonometric polynomial ``R^3 -> R^3`` with integer
    wavevectors ``|k_i| <= kmax`` (scaled to the box), evaluable off-grid."""

    def __init__(self, grid: GridSpec, kmax: int = 2, seed: int = 0):
        r = np.arange(-kmax, kmax + 1)
        ks = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
        ks = ks[np.any(ks != 0, axis=1)]
        rng = np.random.default_rng(seed)
        self.grid = grid
        self.k = ks * (2.0 * math.pi / grid.l)
        self.a = rng.standard_normal((3, len(ks))) / len(ks)
        self.b = rng.standard_normal((3, len(ks))) / len(ks)

    def __call__(self, x, y, z) -> np.ndarray:
        phase = np.multiply.outer(x, self.k[:, 0]) + np.multiply.outer(y, self.k[:, 1]) + np.multiply.outer(z, self.k[:, 2])
        return np.stack([np.cos(phase) @ self.a[i] + np.sin(phase) @ self.b[i] for i in range(3)])

    def sample(self) -> VectorField:
        return VectorField(self.grid, self(*self.grid.mesh()))

    def fd_gradient(self, eta: float = 1e-2) -> np.ndarray:
        """``G[i, j] = d_i u_j`` at the grid points by fourth-order central
        differences of the analytic function with step ``eta``."""
        x = list(self.grid.mesh())
        out = np.empty((3, 3) + self.grid.shape)
        for i in range(3):
            def shifted(s):
                p = list(x)
                p[i] = p[i] + s * eta
                return self(*p)

            out[i] = (8.0 * (shifted(1) - shifted(-1)) - (shifted(2) - shifted(-2))) / (12.0 * eta)
        return out
