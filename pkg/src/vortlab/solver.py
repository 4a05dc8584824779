"""Incompressible Navier-Stokes in velocity form on the periodic box.

The nonlinear term is taken in rotational form ``u x omega``, dealiased
with the two-thirds rule and Leray-projected (the pressure and the
``grad |u|^2/2`` part are removed together).  Viscosity is integrated
exactly with the factor ``exp(-nu |k|^2 t)`` inside a classical RK4
(Lawson) step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import spectral_ops as so
from .errors import BlowupError, CFLError, DomainError
from .fields import GridSpec, SpectralField, VectorField

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitSpec:
    """Initial data: ``kind`` is ``taylor-green``, ``abc`` or ``random``."""

    kind: str = "taylor-green"
    abc: tuple = (1.0, 1.0, 1.0)
    amplitude: float = 1.0
    slope: float = -5.0 / 3.0
    energy: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("taylor-green", "abc", "random"):
            raise DomainError(f"unknown initial condition {self.kind!r}")


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    dt: float
    t_end: float
    nu: float = 1.0
    init: InitSpec = field(default_factory=InitSpec)
    dealias: bool = True
    output_every: int = 1
    seed: int = 0
    cfl_safety: float = 0.5

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"viscosity must be positive, got {self.nu!r}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end >= 0:
            raise DomainError(f"t_end must be >= 0, got {self.t_end!r}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise DomainError(f"output_every must be an integer >= 1, got {self.output_every!r}")
        if not self.cfl_safety > 0:
            raise DomainError("cfl_safety must be positive")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))


@dataclass(frozen=True, eq=False)
class SimState:
    """Velocity state.  ``u`` is the physical-space twin of ``uhat``.

    A state built from physical data keeps those exact bits in ``u`` (the
    checkpoint round trip depends on it).
    """

    t: float
    uhat: SpectralField
    step_index: int = 0
    u: Optional[VectorField] = None

    def __post_init__(self):
        if self.u is None:
            object.__setattr__(self, "u", so.to_physical(self.uhat))

    @property
    def grid(self) -> GridSpec:
        return self.uhat.grid

    @classmethod
    def from_velocity(cls, u: VectorField, t: float = 0.0, step_index: int = 0) -> "SimState":
        return cls(float(t), so.to_spectral(u), step_index, u)

    def vorticity(self) -> VectorField:
        return so.curl(self.u)

    def energy(self) -> float:
        """``(1/2) int |u|^2 dx``."""
        return so.spectral_energy(self.uhat.modes, self.grid)

    def max_velocity(self) -> float:
        return float(self.u.magnitude().max())


# --------------------------------------------------------------------------
# initial data


def _state_from_hat(grid: GridSpec, uh: np.ndarray) -> SimState:
    uh = uh.copy()
    uh[:, 0, 0, 0] = 0.0
    return SimState(0.0, SpectralField(grid, uh))


def init_taylor_green(grid: GridSpec, amplitude: float = 1.0) -> SimState:
    x, y, z = grid.mesh()
    s = 2.0 * math.pi / grid.l
    u = np.stack(
        [
            amplitude * np.sin(s * x) * np.cos(s * y) * np.cos(s * z),
            -amplitude * np.cos(s * x) * np.sin(s * y) * np.cos(s * z),
            np.zeros(grid.shape),
        ]
    )
    return _state_from_hat(grid, so.forward(u))


def abc_field(grid: GridSpec, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> VectorField:
    """Arnold-Beltrami-Childress field; ``curl u = (2 pi / l) u``."""
    x, y, z = grid.mesh()
    s = 2.0 * math.pi / grid.l
    x, y, z = s * x, s * y, s * z
    return VectorField(
        grid,
        np.stack(
            [
                a * np.sin(z) + c * np.cos(y),
                b * np.sin(x) + a * np.cos(z),
                c * np.sin(y) + b * np.cos(x),
            ]
        ),
    )


def init_abc(grid: GridSpec, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> SimState:
    return _state_from_hat(grid, so.forward(abc_field(grid, a, b, c)))


def init_random(grid: GridSpec, slope: float, energy: float, seed: int) -> SimState:
    """Random solenoidal field with shell spectrum ``E(k) ~ k^slope``.

    Modes are kept up to the two-thirds cutoff; the result is rescaled to
    the requested kinetic energy ``(1/2) int |u|^2``.
    """
    if energy < 0:
        raise DomainError("energy must be >= 0")
    wn = so.wavenumbers(grid)
    shape = (3,) + wn.k2.shape
    if energy == 0:
        return _state_from_hat(grid, np.zeros(shape, dtype=np.complex128))
    rng = np.random.default_rng(seed)
    noise = so.forward(rng.standard_normal((3,) + grid.shape))
    kmag = np.sqrt(wn.k2) * grid.l / (2.0 * math.pi)
    # E(k) ~ k^slope over a shell of area ~k^2 => |u_k| ~ k^((slope - 2)/2)
    amp = np.zeros_like(kmag)
    np.power(kmag, 0.5 * (slope - 2.0), out=amp, where=kmag > 0)
    uh = so._project_hat(noise * amp * wn.dealias_mask, wn)
    uh[:, 0, 0, 0] = 0.0
    e0 = so.spectral_energy(uh, grid)
    if e0 == 0:
        return _state_from_hat(grid, uh)
    return _state_from_hat(grid, uh * math.sqrt(energy / e0))


def initial_state(config: SimConfig) -> SimState:
    spec = config.init
    if spec.kind == "taylor-green":
        return init_taylor_green(config.grid, spec.amplitude)
    if spec.kind == "abc":
        return init_abc(config.grid, *spec.abc)
    return init_random(config.grid, spec.slope, spec.energy, spec.seed)


# --------------------------------------------------------------------------
# time stepping


def nonlinear_term(uh: np.ndarray, grid: GridSpec, dealias: bool = True) -> np.ndarray:
    """Projected ``u x omega`` in spectral space."""
    wn = so.wavenumbers(grid)
    u = so.inverse(uh, grid)
    w = so.inverse(so._curl_hat(uh, wn), grid)
    cross = np.stack(
        [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ]
    )
    nh = so.forward(cross)
    if dealias:
        nh *= wn.dealias_mask
    return so._project_hat(nh, wn)


def check_cfl(state: SimState, config: SimConfig, dt: Optional[float] = None) -> None:
    dt = config.dt if dt is None else dt
    umax = state.max_velocity()
    if umax > 0 and dt > config.cfl_safety * config.grid.h / umax:
        raise CFLError(
            f"dt={dt:g} exceeds CFL limit {config.cfl_safety * config.grid.h / umax:g} "
            f"(max|u|={umax:g}, h={config.grid.h:g}) at t={state.t:g}"
        )


def step(
    state: SimState,
    config: SimConfig,
    dt: Optional[float] = None,
    nonlinear: Optional[Callable] = None,
) -> SimState:
    """Advance one integrating-factor RK4 step.

    ``nonlinear`` replaces the advective term (``lambda uh: 0`` turns the
    step into the exact heat propagator).
    """
    dt = config.dt if dt is None else float(dt)
    check_cfl(state, config, dt)
    grid = state.grid
    wn = so.wavenumbers(grid)
    if nonlinear is None:
        def nonlinear(v):
            return nonlinear_term(v, grid, config.dealias)

    e_half = np.exp(-config.nu * wn.k2 * (0.5 * dt))
    e_full = e_half * e_half
    u0 = state.uhat.modes
    k1 = nonlinear(u0)
    k2 = nonlinear(e_half * (u0 + 0.5 * dt * k1))
    k3 = nonlinear(e_half * u0 + 0.5 * dt * k2)
    k4 = nonlinear(e_full * u0 + dt * e_half * k3)
    new = e_full * u0 + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
    new[:, 0, 0, 0] = 0.0
    if not np.all(np.isfinite(new)):
        raise BlowupError(state.t + dt, state.step_index + 1, state.max_velocity())
    return SimState(state.t + dt, SpectralField(grid, new), state.step_index + 1)


# --------------------------------------------------------------------------
# driver

Hook = Callable[[Sequence[SimState], int], object]


def _time_of(config: SimConfig, index: int) -> float:
    n = config.n_steps
    if index <= n:
        return config.t_end if index == n else index * config.dt
    return config.t_end + (index - n) * config.dt


def run(
    config: SimConfig,
    hook: Optional[Hook] = None,
    state: Optional[SimState] = None,
    keep_states: bool = False,
):
    """Integrate to ``t_end`` and collect one record per output step.

    ``hook(samples, index)`` receives consecutive states around the output
    step (``samples[index]`` is the current one) and returns the record.
    When ``hook.needs_neighbors`` is true the samples are three
    consecutive states (``index`` 1, or 0 at t = 0); probe steps past
    ``t_end`` are taken when needed but never recorded.  Without a hook
    the record is ``diagnostics.basic_record``.

    Returns the list of records, or ``(records, states)`` with
    ``keep_states``.
    """
    from .diagnostics import basic_record

    if hook is None:
        hook = basic_record
    needs_neighbors = bool(getattr(hook, "needs_neighbors", False))
    state = initial_state(config) if state is None else state
    check_cfl(state, config)
    n = config.n_steps
    outputs = list(range(0, n + 1, config.output_every))
    if outputs[-1] != n:
        outputs.append(n)

    buf = {0: state}
    kept = [state]
    last_energy = state.energy()

    def get(i):
        nonlocal last_energy
        top = max(buf)
        while top < i:
            dt = _time_of(config, top + 1) - _time_of(config, top)
            nxt = step(buf[top], config, dt)
            nxt = SimState(_time_of(config, top + 1), nxt.uhat, nxt.step_index, nxt.u)
            if top + 1 <= n:
                e = nxt.energy()
                if e > last_energy * (1 + 1e-12) + 1e-300:
                    log.warning("energy increased at t=%g: %.17g -> %.17g", nxt.t, last_energy, e)
                last_energy = e
                if keep_states:
                    kept.append(nxt)
            top += 1
            buf[top] = nxt
        return buf[i]

    records = []
    for m in outputs:
        if not needs_neighbors:
            samples, pos = [get(m)], 0
        elif m == 0:
            samples, pos = [get(0), get(1), get(2)], 0
        else:
            samples, pos = [get(m - 1), get(m), get(m + 1)], 1
        records.append(hook(samples, pos))
        for key in [k for k in buf if k < m]:
            del buf[key]
    return (records, kept) if keep_states else records
