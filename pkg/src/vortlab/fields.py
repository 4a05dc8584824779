"""Periodic grid geometry, real-space fields and discrete Lebesgue norms.

Arrays are stored with axis order (x, y, z) in C (row-major) layout, so the
flat index of point (i, j, k) is ``(i * n + j) * n + k``.  The checkpoint
format relies on this ordering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, GridMismatchError, InvalidFieldError


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``n`` points per axis on a cube of side ``l``."""

    n: int
    l: float = 2.0 * math.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise DomainError(f"grid needs integer n >= 4, got {self.n!r}")
        if not (math.isfinite(self.l) and self.l > 0):
            raise DomainError(f"box side must be positive, got {self.l!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "l", float(self.l))

    @property
    def h(self) -> float:
        return self.l / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def volume(self) -> float:
        return self.l**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def size(self) -> int:
        return self.n**3

    def coords(self) -> np.ndarray:
        """1D coordinates ``x_i = i*l/n``."""
        return np.arange(self.n) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.coords()
        return tuple(np.meshgrid(x, x, x, indexing="ij"))


def _frozen_array(values, shape, what):
    arr = np.array(values, dtype=np.float64)
    if arr.shape != shape:
        raise InvalidFieldError(f"{what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidFieldError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim == 1 and vals.size == self.grid.size:
            vals = vals.reshape(self.grid.shape)
        object.__setattr__(self, "values", _frozen_array(vals, self.grid.shape, "scalar field"))

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Three-component field; ``data`` has shape ``(3, n, n, n)``."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "data", _frozen_array(self.data, (3,) + self.grid.shape, "vector field")
        )

    @classmethod
    def from_components(cls, *components: ScalarField) -> "VectorField":
        if len(components) != 3:
            raise InvalidFieldError("a vector field needs exactly three components")
        grid = components[0].grid
        if any(c.grid != grid for c in components):
            raise GridMismatchError("vector components live on different grids")
        return cls(grid, np.stack([c.values for c in components]))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape))

    @property
    def components(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return tuple(ScalarField(self.grid, c) for c in self.data)

    def __mul__(self, c):
        return VectorField(self.grid, self.data * c)

    __rmul__ = __mul__

    def __add__(self, other: "VectorField"):
        check_same_grid(self, other)
        return VectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "VectorField"):
        check_same_grid(self, other)
        return VectorField(self.grid, self.data - other.data)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean length."""
        return np.sqrt(np.einsum("i...,i...->...", self.data, self.data))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Half-spectrum (``rfftn``) coefficients of a real vector field.

    ``modes`` has shape ``(3, n, n, n//2 + 1)``; the missing half of the
    cube follows from Hermitian symmetry.  Unnormalised forward transform
    (numpy convention).
    """

    grid: GridSpec
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.grid.n
        shape = (3, n, n, n // 2 + 1)
        arr = np.array(self.modes, dtype=np.complex128)
        if arr.shape != shape:
            raise InvalidFieldError(f"spectral field has shape {arr.shape}, expected {shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "modes", arr)


Field = Union[ScalarField, VectorField]


def check_same_grid(*fields) -> GridSpec:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


def _pointwise_magnitude(f: Field) -> np.ndarray:
    if isinstance(f, VectorField):
        return f.magnitude()
    if isinstance(f, ScalarField):
        return f.magnitude()
    raise TypeError(f"expected ScalarField or VectorField, got {type(f).__name__}")


def lp_norm(f: Field, r: float) -> float:
    """Midpoint-rule ``(sum |f|^r dV)^(1/r)``."""
    if not r > 0 or math.isinf(r) or math.isnan(r):
        raise DomainError(f"Lebesgue exponent must be finite and positive, got {r!r}")
    mag = _pointwise_magnitude(f)
    if not np.all(np.isfinite(mag)):
        raise InvalidFieldError("field contains non-finite entries")
    peak = mag.max()
    if peak == 0.0:
        return 0.0
    # scale by the peak so large r does not overflow
    s = np.sum((mag / peak) ** r) * f.grid.cell_volume
    return float(peak * s ** (1.0 / r))


def linf_norm(f: Field) -> float:
    mag = _pointwise_magnitude(f)
    if not np.all(np.isfinite(mag)):
        raise InvalidFieldError("field contains non-finite entries")
    return float(mag.max())
