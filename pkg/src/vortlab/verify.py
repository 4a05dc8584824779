"""Oracle suites behind ``vortlab verify``.

Each suite returns a list of ``CheckResult``; a check passes when the
measured value respects its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import diagnostics as dg
from . import exponents as ex
from . import solver as sv
from . import spectral_ops as so
from . import synthetic as sy
from .fields import GridSpec, ScalarField


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: object
    tolerance: object

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite}/{self.name}: measured {self.measured} (tolerance {self.tolerance})"


def _le(suite, name, value, tol):
    return CheckResult(suite, name, bool(value <= tol), f"{value:.3e}", f"<= {tol:g}")


def _within(suite, name, value, lo, hi):
    return CheckResult(suite, name, bool(lo <= value <= hi), f"{value:.4g}", f"[{lo:g}, {hi:g}]")


# --------------------------------------------------------------------------


def riesz_discrepancies(n=16, images=2, seeds=range(5), beta=0.5, kmax=2):
    grid = GridSpec(n)
    out = []
    for s in seeds:
        mag = ScalarField(grid, sy.band_limited_vector(grid, kmax, s).magnitude())
        out.append(so.riesz_backend_discrepancy(mag, beta, images))
    return out


def suite_riesz(n=16, images=2, seeds=5, tol=1e-2):
    worst = max(riesz_discrepancies(n, images, range(seeds)))
    return [_le("riesz", f"backend discrepancy n={n} images={images} seeds={seeds}", worst, tol)]


def beltrami_error(n=16, dt=1e-3, t_end=0.1, nu=1.0):
    """Max-norm error of an ABC run against ``exp(-nu t) u0`` (box 2 pi)."""
    grid = GridSpec(n)
    cfg = sv.SimConfig(grid, dt, t_end, nu, sv.InitSpec("abc"))
    _, states = sv.run(cfg, keep_states=True)
    u0 = states[0].u.data
    exact = math.exp(-nu * (2 * math.pi / grid.l) ** 2 * states[-1].t) * u0
    return float(np.abs(states[-1].u.data - exact).max() / np.abs(u0).max())


def perturbed_abc_state(grid: GridSpec, weight=0.5) -> sv.SimState:
    u = sv.abc_field(grid) + sv.init_taylor_green(grid).u * weight
    return sv.SimState.from_velocity(u)


def self_convergence_ratios(n=16, dts=(0.05, 0.025, 0.0125), t_end=0.2):
    """Error ratios of successive dt halvings against a run at ``dts[-1]/2``
    on a non-Beltrami flow (ABC plus Taylor-Green)."""
    grid = GridSpec(n)
    s0 = perturbed_abc_state(grid)

    def final(dt):
        _, states = sv.run(sv.SimConfig(grid, dt, t_end), state=s0, keep_states=True)
        return states[-1].u.data

    ref = final(dts[-1] / 2)
    errs = [np.abs(final(dt) - ref).max() for dt in dts]
    return [errs[i] / errs[i + 1] for i in range(len(errs) - 1)], errs


def suite_beltrami(n=16):
    e1 = beltrami_error(n, 1e-3)
    ratios, _ = self_convergence_ratios(n)
    out = [_le("beltrami", f"ABC max relative error n={n} dt=1e-3 t=0.1", e1, 1e-7)]
    out += [_within("beltrami", f"4th-order dt-halving ratio #{i + 1}", r, 8, 32) for i, r in enumerate(ratios)]
    return out


def abc_balance_residual(n=16, dt=1e-3, alpha=0.0, epsilon=0.0, steps=4):
    grid = GridSpec(n)
    cfg = sv.SimConfig(grid, dt, steps * dt, 1.0, sv.InitSpec("abc"))
    _, states = sv.run(cfg, keep_states=True)
    return dg.balance_residual(states, alpha, epsilon)


def suite_balance(n=16):
    r1 = abc_balance_residual(n, 1e-3)
    r2 = abc_balance_residual(n, 5e-4)
    return [
        _le("balance", "ABC alpha=0 residual dt=1e-3", r1, 1e-4),
        _within("balance", "residual ratio under dt halving (O(dt^2) = 4)", r1 / r2, 3.0, 5.0),
    ]


def suite_identities(n=16, seed=0):
    grid = GridSpec(n)
    u = sy.band_limited_velocity(grid, 3, seed)
    omega = so.curl(u)
    scale = np.abs(omega.data).max()
    out = [
        _le("identities", "div curl u", np.abs(so.divergence(omega).values).max() / scale, 1e-12),
        _le(
            "identities",
            "curl grad f",
            np.abs(so.curl(so.gradient(sy.band_limited_scalar(grid, 3, seed))).data).max(),
            1e-12,
        ),
        _le(
            "identities",
            "Biot-Savart inverts curl",
            np.abs(so.biot_savart(omega).data - u.data).max() / np.abs(u.data).max(),
            1e-12,
        ),
    ]
    tu, tw = sy.TrigVectorField(grid, 2, seed), sy.TrigVectorField(grid, 2, seed + 1)
    w = tw.sample()
    k_fd = np.einsum("i...,ij...,j...->...", w.data, tu.fd_gradient(), w.data)
    k = dg.kernel_K(tu.sample(), w).values
    out.append(_le("identities", "kernel K vs 4th-order FD", np.abs(k - k_fd).max() / np.abs(k_fd).max(), 1e-6))
    c1 = dg.riesz_bound_constant(u, omega)
    c2 = dg.riesz_bound_constant(u * 2.0, omega * 2.0)
    out.append(_le("identities", "Riesz bound constant scale invariance", abs(c2 - c1) / c1, 1e-12))
    return out


EXPONENT_R_GRID = (Fraction(5, 4), Fraction(4, 3), Fraction(3, 2), Fraction(7, 4), Fraction(2))


def suite_exponents(samples=1000):
    rep = ex.feasibility_scan(EXPONENT_R_GRID, 12, include_open=False)
    tup = ex.exponent_tuple(2, ex.natural_weights())
    target = (Fraction(2), Fraction(1, 2), Fraction(2), Fraction(3), Fraction(3, 2))
    bad = 0
    per_r = max(samples // len(EXPONENT_R_GRID), 1)
    for i, r in enumerate(EXPONENT_R_GRID):
        for w in ex.closure_feasible_set(r).sample(per_r, seed=i):
            t = ex.exponent_tuple(r, w)
            bad += not (t.consistent and t.beta == ex.HALF == ex.beta_of(r, w))
    return [
        CheckResult(
            "exponents",
            "attainable beta under closure (denominators <= 12)",
            rep.attainable_closed == {ex.HALF},
            ex.format_set(rep.attainable_closed),
            "== {1/2}",
        ),
        CheckResult(
            "exponents",
            "Hilbertian tuple",
            tup.consistent and tup.as_tuple() == target,
            "(" + ", ".join(ex.format_exponent(v) for v in tup.as_tuple()) + ")",
            "== (2, 1/2, 2, 3, 3/2)",
        ),
        CheckResult("exponents", f"chain property over {per_r * len(EXPONENT_R_GRID)} samples", bad == 0, bad, "0 failures"),
    ]


SUITES = {
    "riesz": suite_riesz,
    "beltrami": suite_beltrami,
    "balance": suite_balance,
    "identities": suite_identities,
    "exponents": suite_exponents,
}


def run_suite(name: str, **kwargs) -> list:
    if name == "all":
        return [res for fn in SUITES.values() for res in fn()]
    return SUITES[name](**kwargs)
