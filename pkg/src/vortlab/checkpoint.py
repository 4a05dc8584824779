"""Binary velocity checkpoints.

Layout (little-endian)::

    b"VDL1"             magic and format version
    u32 n
    f64 l, f64 nu, f64 t
    f64[3, n, n, n]     physical velocity, component-major, then x, y, z

Reading back a written state gives the same bits.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CheckpointFormatError
from .fields import GridSpec, VectorField
from .solver import SimState

MAGIC = b"VDL1"
_HEADER = struct.Struct("<4sIddd")


@dataclass(frozen=True)
class Checkpoint:
    state: SimState
    nu: float


def to_bytes(state: SimState, nu: float) -> bytes:
    g = state.grid
    head = _HEADER.pack(MAGIC, g.n, g.l, float(nu), float(state.t))
    return head + np.ascontiguousarray(state.u.data, dtype="<f8").tobytes()


def from_bytes(blob: bytes) -> Checkpoint:
    if len(blob) < _HEADER.size:
        raise CheckpointFormatError(f"checkpoint truncated: {len(blob)} bytes, header needs {_HEADER.size}")
    magic, n, l, nu, t = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        if magic[:3] == MAGIC[:3]:
            raise CheckpointFormatError(f"unsupported checkpoint version {magic[3:]!r} (expected {MAGIC[3:]!r})")
        raise CheckpointFormatError(f"bad magic {magic!r} (expected {MAGIC!r})")
    expected = _HEADER.size + 3 * n**3 * 8
    if len(blob) != expected:
        raise CheckpointFormatError(f"checkpoint size {len(blob)} does not match n={n} (expected {expected})")
    try:
        grid = GridSpec(n, l)
        data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(3, n, n, n)
        u = VectorField(grid, data.astype(np.float64))
    except ValueError as exc:
        raise CheckpointFormatError(f"invalid checkpoint contents: {exc}") from exc
    return Checkpoint(SimState.from_velocity(u, t), nu)


def write_checkpoint(path, state: SimState, nu: float) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(to_bytes(state, nu))
    tmp.replace(path)


def read_checkpoint(path) -> Checkpoint:
    return from_bytes(Path(path).read_bytes())
