"""Field-level diagnostics: direction angles and Hoelder fits, the
stretching kernel, Riesz bounds, weighted enstrophy balances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from . import spectral_ops as so
from .errors import DegenerateError, DomainError, InsufficientDataError, UndefinedAngleError
from .fields import GridSpec, ScalarField, VectorField, check_same_grid, lp_norm

DEFAULT_N_PAIRS = 200_000
DEFAULT_N_BINS = 12
DEFAULT_QUANTILE = 0.95
BETA_CAP = 2.0
DEGENERATE_TOL = 1e-12
MAG_FLOOR = 1e-12


@dataclass(frozen=True)
class HolderFit:
    beta_hat: Optional[float]
    c_hat: Optional[float]
    n_pairs: int
    quantile: float
    separations: list
    bin_values: list
    bin_counts: list
    fit_residual: float
    degenerate: bool = False
    clipped: bool = False


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    enstrophy: float
    step_index: int = 0
    omega_norms: dict = field(default_factory=dict)
    gen_enstrophy: dict = field(default_factory=dict)
    grad_term: dict = field(default_factory=dict)
    kernel_linf: float = float("nan")
    riesz_const: float = float("nan")
    balance_residual: dict = field(default_factory=dict)
    holder: Optional[HolderFit] = None


def enstrophy(omega: VectorField) -> float:
    """``(1/2) int |omega|^2 dx``."""
    return 0.5 * float(np.sum(omega.data**2)) * omega.grid.cell_volume


def basic_record(samples, index: int) -> DiagnosticsRecord:
    s = samples[index]
    return DiagnosticsRecord(s.t, s.energy(), enstrophy(s.vorticity()), s.step_index)


# --------------------------------------------------------------------------
# direction angles


def _flat_index(grid: GridSpec, idx) -> int:
    if isinstance(idx, (int, np.integer)):
        if not 0 <= idx < grid.size:
            raise IndexError(f"flat index {idx} out of range")
        return int(idx)
    i, j, k = (int(v) % grid.n for v in idx)
    return (i * grid.n + j) * grid.n + k


def sin_theta(omega: VectorField, i, j) -> float:
    """``|w_i x w_j| / (|w_i| |w_j|)`` clamped to [0, 1].

    ``i`` and ``j`` are flat indices or ``(ix, iy, iz)`` tuples.
    """
    flat = omega.data.reshape(3, -1)
    a = flat[:, _flat_index(omega.grid, i)]
    b = flat[:, _flat_index(omega.grid, j)]
    na = math.sqrt(a @ a)
    nb = math.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedAngleError("angle undefined where the vorticity vanishes")
    c = np.cross(a, b)
    return min(math.sqrt(c @ c) / (na * nb), 1.0)


def lattice_offsets(grid: GridSpec, delta_max: float):
    """Integer offsets with ``0 < |o| h <= delta_max`` and their lengths."""
    m = int(math.floor(delta_max / grid.h + 1e-9))
    r = np.arange(-m, m + 1)
    o = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    sep = np.sqrt(np.sum(o.astype(np.float64) ** 2, axis=1)) * grid.h
    keep = (sep > 0) & (sep <= delta_max * (1 + 1e-12))
    return np.ascontiguousarray(o[keep], dtype=np.int64), sep[keep]


def _holder_setup(omega, k_threshold, delta_max, n_bins):
    grid = omega.grid
    mag = omega.magnitude().ravel()
    peak = float(mag.max())
    if peak == 0.0:
        raise InsufficientDataError("vorticity vanishes identically")
    k = 0.1 * peak if k_threshold is None else float(k_threshold)
    if k < 0:
        raise DomainError("k_threshold must be >= 0")
    delta = grid.l / 6.0 if delta_max is None else float(delta_max)
    if not grid.h <= delta <= grid.l / 2:
        raise DomainError(f"delta_max must lie in [h, l/2] = [{grid.h:g}, {grid.l / 2:g}]")
    if n_bins < 3:
        raise DomainError("need at least 3 separation bins")
    valid = (mag >= k) & (mag > 0)
    if not valid.any():
        raise InsufficientDataError("no grid point passes the magnitude threshold")
    safe = np.where(valid, mag, 1.0)
    d = np.ascontiguousarray(omega.data.reshape(3, -1) / safe)
    offsets, seps = lattice_offsets(grid, delta)
    edges = np.geomspace(grid.h, delta, n_bins + 1)
    obin = np.clip(np.searchsorted(edges, seps * (1 - 1e-12), side="right") - 1, 0, n_bins - 1)
    return d, valid, offsets, seps, obin.astype(np.int64)


def _fit_bins(centers, values, counts, quantile, n_pairs, beta_cap):
    centers = np.asarray(centers, dtype=float)
    values = np.asarray(values, dtype=float)
    base = dict(
        n_pairs=int(n_pairs),
        quantile=quantile,
        separations=centers.tolist(),
        bin_values=values.tolist(),
        bin_counts=[int(c) for c in counts],
    )
    if values.size == 0 or values.max() <= DEGENERATE_TOL:
        return HolderFit(None, None, fit_residual=float("nan"), degenerate=True, **base)
    use = values > DEGENERATE_TOL
    if use.sum() < 3:
        raise InsufficientDataError(f"only {int(use.sum())} non-empty separation bins (need 3)")
    lx, ly = np.log(centers[use]), np.log(values[use])
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + icpt)) ** 2)))
    beta = float(np.clip(slope, 0.0, beta_cap))
    return HolderFit(beta, float(math.exp(icpt)), fit_residual=resid, clipped=bool(beta != slope), **base)


def _sample_pairs(omega, k_threshold, delta_max, n_pairs, n_bins, seed):
    """Yield ``(a, b, separation, sin_theta)`` arrays, one per occupied bin."""
    d, valid, offsets, seps, obin = _holder_setup(omega, k_threshold, delta_max, n_bins)
    n = omega.grid.n
    rng = np.random.default_rng(seed)
    valid_idx = np.flatnonzero(valid)
    occupied = np.unique(obin)
    per_bin = max(n_pairs // len(occupied), 1)
    for b in occupied:
        cand = np.flatnonzero(obin == b)
        got_a, got_b, got_s = [], [], []
        have = 0
        for _ in range(50):
            m = 2 * (per_bin - have)
            base = valid_idx[rng.integers(0, valid_idx.size, m)]
            o = cand[rng.integers(0, cand.size, m)]
            i, j, k = np.unravel_index(base, (n, n, n))
            partner = np.ravel_multi_index(
                ((i + offsets[o, 0]) % n, (j + offsets[o, 1]) % n, (k + offsets[o, 2]) % n), (n, n, n)
            )
            take = np.flatnonzero(valid[partner])[: per_bin - have]
            got_a.append(base[take])
            got_b.append(partner[take])
            got_s.append(seps[o[take]])
            have += take.size
            if have >= per_bin:
                break
        if have == 0:
            continue
        a = np.concatenate(got_a).astype(np.int64)
        bb = np.concatenate(got_b).astype(np.int64)
        yield a, bb, np.concatenate(got_s), np.asarray(kernels.sin_theta_pairs(d, a, bb))


@dataclass(frozen=True)
class AnglePairSample:
    x_index: tuple
    y_index: tuple
    separation: float
    sin_theta: float


def sample_angle_pairs(
    omega: VectorField,
    k_threshold: Optional[float] = None,
    delta_max: Optional[float] = None,
    n_pairs: int = 1000,
    n_bins: int = DEFAULT_N_BINS,
    seed: int = 0,
) -> list:
    """The pairs ``estimate_holder`` would draw, as ``AnglePairSample``s."""
    shape = omega.grid.shape
    out = []
    for a, b, s, st in _sample_pairs(omega, k_threshold, delta_max, n_pairs, n_bins, seed):
        for p in range(a.size):
            out.append(
                AnglePairSample(
                    tuple(int(v) for v in np.unravel_index(a[p], shape)),
                    tuple(int(v) for v in np.unravel_index(b[p], shape)),
                    float(s[p]),
                    float(st[p]),
                )
            )
    return out


def estimate_holder(
    omega: VectorField,
    k_threshold: Optional[float] = None,
    delta_max: Optional[float] = None,
    n_pairs: int = DEFAULT_N_PAIRS,
    quantile: float = DEFAULT_QUANTILE,
    n_bins: int = DEFAULT_N_BINS,
    seed: int = 0,
    beta_cap: float = BETA_CAP,
) -> HolderFit:
    """Fit ``sin(theta) <= c |x - y|^beta`` from sampled point pairs.

    Pairs are stratified by log-separation bin: each occupied bin gets
    ``n_pairs // n_occupied`` pairs drawn uniformly from the pairs in that
    bin whose endpoints both have ``|omega| >= k_threshold`` (default
    ``0.1 max|omega|``).  The per-bin ``quantile`` of sin(theta) is fitted
    against the mean log-separation of the bin.
    """
    if not 0 < quantile <= 1:
        raise DomainError("quantile must lie in (0, 1]")
    centers, values, counts = [], [], []
    for a, _, s, st in _sample_pairs(omega, k_threshold, delta_max, n_pairs, n_bins, seed):
        centers.append(float(np.exp(np.mean(np.log(s)))))
        values.append(float(np.quantile(st, quantile)))
        counts.append(a.size)
    return _fit_bins(centers, values, counts, quantile, sum(counts), beta_cap)


@dataclass(frozen=True)
class ExhaustiveScan:
    """All-pairs statistics per separation bin (non-empty bins only)."""

    centers: np.ndarray
    quantiles: np.ndarray
    sups: np.ndarray
    counts: np.ndarray
    quantile_fit: HolderFit
    sup_fit: HolderFit


_HIST_EDGES = np.geomspace(1e-12, 1.0, 4001)


def holder_scan_exhaustive(
    omega: VectorField,
    k_threshold: Optional[float] = None,
    delta_max: Optional[float] = None,
    quantile: float = DEFAULT_QUANTILE,
    n_bins: int = DEFAULT_N_BINS,
    beta_cap: float = BETA_CAP,
) -> ExhaustiveScan:
    """Visit every admissible pair once; per-bin sup and exact quantile.

    Quantiles come from a log-spaced histogram with relative resolution
    0.7 %.  Intended as a reference for ``estimate_holder``.
    """
    d, valid, offsets, seps, obin = _holder_setup(omega, k_threshold, delta_max, n_bins)
    sup, hist, per_offset = kernels.pair_scan(d, valid, omega.grid.n, offsets, obin, n_bins, _HIST_EDGES)
    sup, hist, per_offset = np.asarray(sup), np.asarray(hist), np.asarray(per_offset)
    counts = hist.sum(axis=1)
    logsum = np.bincount(obin, weights=per_offset * np.log(seps), minlength=n_bins)
    keep = counts > 0
    centers = np.exp(logsum[keep] / counts[keep])
    mids = np.concatenate([[0.0], np.sqrt(_HIST_EDGES[:-1] * _HIST_EDGES[1:]), [1.0]])
    qs = []
    for row in hist[keep]:
        c = np.cumsum(row)
        qs.append(mids[np.searchsorted(c, quantile * c[-1])])
    qs = np.array(qs)
    total = int(counts.sum())
    return ExhaustiveScan(
        centers,
        qs,
        sup[keep],
        counts[keep],
        _fit_bins(centers, qs, counts[keep], quantile, total, beta_cap),
        _fit_bins(centers, sup[keep], counts[keep], 1.0, total, beta_cap),
    )


# --------------------------------------------------------------------------
# stretching kernel and Riesz bound


def kernel_K(u: VectorField, omega: VectorField) -> ScalarField:
    """Pointwise ``sum_ij omega_i (d_i u_j) omega_j``."""
    check_same_grid(u, omega)
    g = so.velocity_gradient(u)
    w = omega.data
    return ScalarField(u.grid, np.einsum("i...,ij...,j...->...", w, g, w))


def riesz_bound_constant(
    u: VectorField,
    omega: VectorField,
    beta: float = 0.5,
    backend: so.RieszBackend = so.RieszBackend(),
) -> float:
    """Smallest ``c`` with ``|K| <= c |omega|^2 I`` on the grid.

    ``I`` is the direct-sum Riesz potential of ``|omega|``; points where
    ``|omega|^2 I`` is below ``1e-12`` of its maximum are skipped.
    """
    check_same_grid(u, omega)
    mag = omega.magnitude()
    if mag.max() == 0.0:
        raise DegenerateError("vorticity vanishes identically")
    if backend.variant != "direct-sum":
        raise DomainError("riesz_bound_constant needs the (positive) direct-sum backend")
    pot = so.riesz_potential(ScalarField(omega.grid, mag), beta, backend).values
    denom = mag**2 * pot
    floor = 1e-12 * denom.max()
    use = denom > floor
    if not use.any():
        raise DegenerateError("|omega|^2 I is below the floor everywhere")
    k = np.abs(kernel_K(u, omega).values)
    return float(np.max(k[use] / denom[use]))


def riesz_mapping_ratio(
    omega: VectorField,
    beta: float,
    r_hat: float,
    backend: so.RieszBackend = so.RieszBackend(),
) -> float:
    """``||I||_q / ||omega||_r_hat`` with ``1/q = 1/r_hat - beta/3``."""
    if not 1.0 < r_hat < 3.0:
        raise DomainError("r_hat must lie in (1, 3)")
    if not 0.0 < beta < 3.0:
        raise DomainError("beta must lie in (0, 3)")
    inv_q = 1.0 / r_hat - beta / 3.0
    if inv_q <= 0:
        raise DomainError(f"1/r_hat - beta/3 = {inv_q:g} must be positive")
    den = lp_norm(omega, r_hat)
    if den == 0.0:
        return 0.0
    pot = so.riesz_potential(ScalarField(omega.grid, omega.magnitude()), beta, backend)
    return lp_norm(pot, 1.0 / inv_q) / den


# --------------------------------------------------------------------------
# weighted enstrophy and its balance


def _check_alpha_eps(alpha, epsilon):
    if not 0.0 <= alpha <= 0.5:
        raise DomainError(f"alpha must lie in [0, 1/2], got {alpha!r}")
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")


def generalized_enstrophy(omega: VectorField, alpha: float, epsilon: float) -> float:
    """``int (epsilon + |omega|^2)^(1 - alpha) dx``."""
    _check_alpha_eps(alpha, epsilon)
    s = epsilon + np.einsum("i...,i...->...", omega.data, omega.data)
    return float(np.sum(s ** (1.0 - alpha)) * omega.grid.cell_volume)


@dataclass(frozen=True)
class _GradientData:
    s: np.ndarray  # |omega|^2
    m: np.ndarray  # floored magnitude sqrt(|omega|^2 + floor^2)
    grad_w2: np.ndarray  # |grad omega|^2 = sum_ij (d_i omega_j)^2
    proj2: np.ndarray  # sum_k (omega . d_k omega)^2 = |omega|^2 |grad|omega||^2
    lap_dot: np.ndarray  # (Lap omega) . omega


def _gradient_data(omega: VectorField) -> _GradientData:
    g = so.velocity_gradient(omega)  # g[k, j] = d_k omega_j
    w = omega.data
    s = np.einsum("i...,i...->...", w, w)
    floor = MAG_FLOOR * math.sqrt(float(s.max())) if s.max() > 0 else 0.0
    m = np.sqrt(s + floor**2)
    proj = np.einsum("j...,kj...->k...", w, g)
    lap = so.laplacian(omega).data
    return _GradientData(
        s=s,
        m=m,
        grad_w2=np.einsum("kj...,kj...->...", g, g),
        proj2=np.einsum("k...,k...->...", proj, proj),
        lap_dot=np.einsum("i...,i...->...", lap, w),
    )


def gradient_term(omega: VectorField, alpha: float) -> float:
    """``|| grad(|omega|^(1-alpha)) ||_2^2``.

    The magnitude is floored at ``1e-12 max|omega|`` and differentiated by
    the chain rule, ``grad m = (omega . grad omega) / m``.
    """
    _check_alpha_eps(alpha, 0.0)
    gd = _gradient_data(omega)
    if gd.s.max() == 0:
        return 0.0
    val = (1.0 - alpha) ** 2 * gd.m ** (-2.0 * alpha) * gd.proj2 / gd.m**2
    return float(np.sum(val) * omega.grid.cell_volume)


def weighted_dissipation_terms(omega: VectorField, alpha: float, epsilon: float) -> dict:
    """Terms of ``-int f(|w|^2) Lap w . w`` with ``f(s) = (eps + s)^-alpha``.

    Returns ``lhs`` (the left side, computed directly), ``dissipation``
    ``int f |grad w|^2``, ``weight`` ``2 int f'(|w|^2) |w|^2 |grad|w||^2``
    and ``weight_full`` (same with ``|grad w|^2`` in place of
    ``|grad|w||^2``).  Integration by parts gives
    ``lhs = dissipation + weight``.
    """
    _check_alpha_eps(alpha, epsilon)
    gd = _gradient_data(omega)
    base = epsilon + gd.s
    if gd.s.max() == 0:
        return dict(lhs=0.0, dissipation=0.0, weight=0.0, weight_full=0.0)
    base = np.maximum(base, gd.m**2) if epsilon == 0 else base
    f = base**-alpha
    fp = -alpha * base ** (-alpha - 1.0)
    vol = omega.grid.cell_volume
    return dict(
        lhs=float(-np.sum(f * gd.lap_dot) * vol),
        dissipation=float(np.sum(f * gd.grad_w2) * vol),
        weight=float(2.0 * np.sum(fp * gd.proj2) * vol),
        weight_full=float(2.0 * np.sum(fp * gd.s * gd.grad_w2) * vol),
    )


@dataclass(frozen=True)
class BalanceTerms:
    """Terms of the weighted enstrophy balance at one time ``t``::

        time + nu * (dissipation + weight) = production

    ``residual`` is the absolute imbalance over the largest term;
    ``slack`` is ``int |w|^(-2 alpha) |K|`` minus the left side of the
    eps -> 0 inequality and should be nonnegative.
    """

    t: float
    time: float
    dissipation: float
    weight: float
    production: float
    residual: float
    slack: float


def _derivative(ts, ys, index):
    t0, t1, t2 = ts
    y0, y1, y2 = ys
    if len({t0, t1, t2}) < 3:
        raise InsufficientDataError("samples must have distinct times")
    t = ts[index]
    # derivative of the quadratic through the three points, evaluated at t
    return (
        y0 * ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2))
        + y1 * ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2))
        + y2 * ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1))
    )


def _sample_fields(sample):
    if hasattr(sample, "u"):
        return sample.t, sample.u
    t, u = sample
    return t, u


def balance_terms(samples: Sequence, index: int, alpha: float, epsilon: float, nu: float = 1.0) -> BalanceTerms:
    """Balance at ``samples[index]`` using three consecutive samples.

    Samples are ``SimState`` objects or ``(t, u)`` pairs; the time
    derivative is that of the quadratic interpolant (centered differences
    for equal spacing at ``index`` 1, one-sided second order otherwise).
    """
    _check_alpha_eps(alpha, epsilon)
    if len(samples) != 3:
        raise InsufficientDataError("balance needs exactly three consecutive samples")
    ts, ges = [], []
    for smp in samples:
        t, u = _sample_fields(smp)
        ts.append(float(t))
        ges.append(generalized_enstrophy(so.curl(u), alpha, epsilon))
    t, u = _sample_fields(samples[index])
    omega = so.curl(u)
    time_term = _derivative(ts, ges, index) / (2.0 * (1.0 - alpha))
    terms = weighted_dissipation_terms(omega, alpha, epsilon)
    k = kernel_K(u, omega).values
    gd = _gradient_data(omega)
    base = epsilon + gd.s
    if epsilon == 0:
        base = np.maximum(base, gd.m**2)
    vol = omega.grid.cell_volume
    production = float(np.sum(base**-alpha * k) * vol) if gd.s.max() > 0 else 0.0
    lhs = time_term + nu * (terms["dissipation"] + terms["weight"])
    scale = max(abs(time_term), abs(nu * terms["dissipation"]), abs(nu * terms["weight"]), abs(production))
    residual = abs(lhs - production) / scale if scale > 0 else 0.0

    # eps -> 0 inequality form
    pow_norm = [lp_norm(so.curl(_sample_fields(smp)[1]), 2 * (1 - alpha)) ** (2 * (1 - alpha)) for smp in samples]
    dnorm = _derivative(ts, pow_norm, index) / (2.0 * (1.0 - alpha))
    grad = gradient_term(omega, alpha)
    rhs = float(np.sum(gd.m ** (-2.0 * alpha) * np.abs(k)) * vol) if gd.s.max() > 0 else 0.0
    slack = rhs - (dnorm + nu * (1 - 2 * alpha) / (1 - alpha) ** 2 * grad)
    return BalanceTerms(t, time_term, terms["dissipation"], terms["weight"], production, residual, slack)


def balance_residual(samples: Sequence, alpha: float, epsilon: float, nu: float = 1.0) -> float:
    """Largest normalised balance residual over the interior samples."""
    if len(samples) < 3:
        raise InsufficientDataError("balance residual needs at least 3 consecutive samples")
    return max(
        balance_terms(samples[i - 1 : i + 2], 1, alpha, epsilon, nu).residual for i in range(1, len(samples) - 1)
    )


# --------------------------------------------------------------------------
# run hook


@dataclass(frozen=True)
class DiagnosticsOptions:
    r_list: tuple = (1.25, 1.5, 2.0)
    alpha_eps: tuple = ((0.0, 0.0), (0.25, 1e-6))
    riesz_beta: float = 0.5
    riesz_images: int = 1
    holder_every: int = 0  # outputs between Hoelder fits; 0 disables
    holder_k_threshold: Optional[float] = None
    holder_delta_max: Optional[float] = None
    holder_n_pairs: int = DEFAULT_N_PAIRS
    holder_quantile: float = DEFAULT_QUANTILE
    holder_n_bins: int = DEFAULT_N_BINS
    holder_seed: int = 0

    def __post_init__(self):
        for r in self.r_list:
            if not 1.0 < r <= 2.0:
                raise DomainError(f"recorded vorticity norms need r in (1, 2], got {r!r}")
        for a, e in self.alpha_eps:
            _check_alpha_eps(a, e)


class DiagnosticsHook:
    """Callable for ``solver.run`` producing full ``DiagnosticsRecord``s."""

    needs_neighbors = True

    def __init__(self, options: DiagnosticsOptions = DiagnosticsOptions(), nu: float = 1.0):
        self.options = options
        self.nu = nu
        self._calls = 0

    def __call__(self, samples, index) -> DiagnosticsRecord:
        opt = self.options
        state = samples[index]
        u = state.u
        omega = state.vorticity()
        rec = DiagnosticsRecord(state.t, state.energy(), enstrophy(omega), state.step_index)
        rec.omega_norms = {r: lp_norm(omega, r) for r in opt.r_list}
        for a, e in opt.alpha_eps:
            rec.gen_enstrophy[(a, e)] = generalized_enstrophy(omega, a, e)
            rec.grad_term[a] = gradient_term(omega, a)
            rec.balance_residual[(a, e)] = balance_terms(samples, index, a, e, self.nu).residual
        rec.kernel_linf = float(np.abs(kernel_K(u, omega).values).max())
        try:
            rec.riesz_const = riesz_bound_constant(
                u, omega, opt.riesz_beta, so.RieszBackend("direct-sum", opt.riesz_images)
            )
        except DegenerateError:
            rec.riesz_const = 0.0
        if opt.holder_every and self._calls % opt.holder_every == 0:
            try:
                rec.holder = estimate_holder(
                    omega,
                    opt.holder_k_threshold,
                    opt.holder_delta_max,
                    opt.holder_n_pairs,
                    opt.holder_quantile,
                    opt.holder_n_bins,
                    opt.holder_seed,
                )
            except InsufficientDataError:
                rec.holder = None
        self._calls += 1
        return rec
