"""``vortlab`` command line.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification
failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from . import diagnostics as dg
from . import exponents as ex
from . import solver as sv
from . import spectral_ops as so
from . import verify
from .checkpoint import read_checkpoint, write_checkpoint
from .config import RunConfig, load_config
from .errors import ConfigError, VortlabError
from .fields import lp_norm

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("vortlab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def fmt(x) -> str:
    """17 significant digits: re-parsing gives the same double."""
    return "%.17g" % x


# --------------------------------------------------------------------------
# simulate


def timeseries_header(cfg: RunConfig) -> list:
    d = cfg.diagnostics
    cols = ["t", "energy", "enstrophy"]
    cols += [f"omega_L{r:g}" for r in d.r_list]
    cols += [f"gen_enstrophy_a{a:g}_e{e:g}" for a, e in d.alpha_eps]
    cols += [f"grad_term_a{a:g}" for a in dict.fromkeys(a for a, _ in d.alpha_eps)]
    cols += ["kernel_linf", "riesz_const"]
    cols += [f"balance_residual_a{a:g}_e{e:g}" for a, e in d.alpha_eps]
    if d.holder_every:
        cols += ["holder_beta", "holder_c"]
    return cols


def timeseries_row(cfg: RunConfig, rec: dg.DiagnosticsRecord) -> list:
    d = cfg.diagnostics
    vals = [rec.t, rec.energy, rec.enstrophy]
    vals += [rec.omega_norms[r] for r in d.r_list]
    vals += [rec.gen_enstrophy[(a, e)] for a, e in d.alpha_eps]
    vals += [rec.grad_term[a] for a in dict.fromkeys(a for a, _ in d.alpha_eps)]
    vals += [rec.kernel_linf, rec.riesz_const]
    vals += [rec.balance_residual[(a, e)] for a, e in d.alpha_eps]
    if d.holder_every:
        h = rec.holder
        ok = h is not None and not h.degenerate
        vals += [h.beta_hat if ok else math.nan, h.c_hat if ok else math.nan]
    return [fmt(v) for v in vals]


class _CheckpointingHook:
    needs_neighbors = True

    def __init__(self, cfg: RunConfig, out: Path):
        self.inner = dg.DiagnosticsHook(cfg.diagnostics, cfg.sim.nu)
        self.cfg = cfg
        self.out = out
        self.count = 0
        self.final_step = cfg.sim.n_steps

    def __call__(self, samples, index):
        rec = self.inner(samples, index)
        state = samples[index]
        every = self.cfg.checkpoint_every
        if (every and self.count % every == 0) or state.step_index == self.final_step:
            write_checkpoint(self.out / f"checkpoint_{state.step_index:06d}.vdl", state, self.cfg.sim.nu)
        self.count += 1
        return rec


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise VortlabError(f"output directory {out} is not writable: {exc}") from exc
    records = sv.run(cfg.sim, hook=_CheckpointingHook(cfg, out))
    with open(out / cfg.csv_name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(timeseries_header(cfg))
        for rec in records:
            w.writerow(timeseries_row(cfg, rec))
    print(f"wrote {len(records)} records to {out / cfg.csv_name}")
    return EXIT_OK


# --------------------------------------------------------------------------
# diagnose


def cmd_diagnose(args) -> int:
    ck = read_checkpoint(args.checkpoint)
    state = ck.state
    u = state.u
    omega = so.curl(u)
    out = Path(args.output) if args.output else Path(args.checkpoint).parent
    out.mkdir(parents=True, exist_ok=True)
    k_threshold = args.k_threshold
    if args.k_fraction is not None:
        k_threshold = args.k_fraction * float(omega.magnitude().max())
    fit = dg.estimate_holder(
        omega,
        k_threshold,
        args.delta_max,
        args.n_pairs,
        args.quantile,
        args.bins,
        args.seed,
    )
    try:
        riesz = dg.riesz_bound_constant(u, omega, args.beta, so.RieszBackend("direct-sum", args.images))
    except VortlabError as exc:
        log.warning("Riesz bound constant unavailable: %s", exc)
        riesz = math.nan
    with open(out / "holder.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["separation", "quantile_value", "fit_value", "n_pairs"])
        for s, v, c in zip(fit.separations, fit.bin_values, fit.bin_counts):
            fitted = math.nan if fit.degenerate else fit.c_hat * s**fit.beta_hat
            w.writerow([fmt(s), fmt(v), fmt(fitted), c])
    summary = {
        "t": state.t,
        "n": state.grid.n,
        "l": state.grid.l,
        "nu": ck.nu,
        "degenerate": fit.degenerate,
        "beta_hat": fit.beta_hat,
        "c_hat": fit.c_hat,
        "beta_clipped": fit.clipped,
        "fit_residual": None if math.isnan(fit.fit_residual) else fit.fit_residual,
        "n_pairs": fit.n_pairs,
        "quantile": fit.quantile,
        "riesz_beta": args.beta,
        "riesz_const": None if math.isnan(riesz) else riesz,
        "energy": state.energy(),
        "enstrophy": dg.enstrophy(omega),
        "omega_norms": {f"L{r:g}": lp_norm(omega, r) for r in (1.5, 2.0)} | {"Linf": float(omega.magnitude().max())},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if fit.degenerate:
        print("direction field is constant: Hoelder fit degenerate")
    else:
        print(f"beta_hat = {fit.beta_hat:.4f}, c_hat = {fit.c_hat:.4g}, Riesz c = {riesz:.4g}")
    return EXIT_OK


# --------------------------------------------------------------------------
# exponents


def _exp_arg(text):
    try:
        return ex.as_exponent(text)
    except VortlabError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _weights_str(w: ex.InterpolationWeights) -> str:
    f = ex.format_exponent
    return f"({f(w.alpha)}, {f(w.theta)}, {f(w.gamma)} | {f(w.alpha_p)}, {f(w.theta_p)}, {f(w.gamma_p)})"


def _tuple_str(t: ex.ExponentTuple) -> str:
    return "(" + ", ".join(ex.format_exponent(v) for v in t.as_tuple()) + ")"


def cmd_exponents(args) -> int:
    if args.what == "tuple":
        r = args.r
        fs = ex.closure_feasible_set(r)
        print("weights (alpha, theta, gamma | alpha', theta', gamma') -> (r, beta, r_hat, q, q')")
        nat = ex.natural_weights()
        print(f"natural  {_weights_str(nat)} -> {_tuple_str(ex.exponent_tuple(r, nat))}")
        for a, t in fs.vertices():
            w = fs.weights(a, t)
            tup = ex.exponent_tuple(r, w)
            flag = "" if tup.consistent else "  (inconsistent)"
            print(f"vertex   {_weights_str(w)} -> {_tuple_str(tup)}{flag}")
        return EXIT_OK
    if args.what == "scan":
        rs = [ex.as_exponent(s) for s in args.r.split(",") if s.strip()] if args.r else []
        rep = ex.feasibility_scan(rs, args.denom, include_open=args.open)
        print(ex.format_scan(rep))
        return EXIT_OK
    s, q = args.s, args.q
    if args.vorticity:
        value = 2 * ex.reciprocal(s) + 3 * ex.reciprocal(q)
        print(f"2/s + 3/r = {value}: {ex.vorticity_region(s, q)}")
        if q != ex.INF and 1 < q < 3:
            _, vq, vlabel = ex.paired_regions(s, q)
            print(f"velocity L^s(L^{vq}) by embedding: 2/s + 3/q = {ex.scaling_index(s, vq)}: {vlabel}")
    else:
        print(f"2/s + 3/q = {ex.scaling_index(s, q)}: {ex.classify_open_problem(s, q)}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    kwargs = {}
    if args.suite == "riesz":
        kwargs = {k: v for k, v in (("n", args.n), ("images", args.images), ("seeds", args.seeds)) if v is not None}
    elif args.suite in ("beltrami", "balance", "identities") and args.n is not None:
        kwargs = {"n": args.n}
    results = verify.run_suite(args.suite, **kwargs)
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vortlab", description="Vorticity-direction regularity laboratory.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a simulation from a TOML config")
    s.add_argument("config")
    s.add_argument("output", help="output directory")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("diagnose", help="Hoelder fit and Riesz bound of a checkpoint")
    d.add_argument("checkpoint")
    d.add_argument("-o", "--output", help="output directory (default: next to the checkpoint)")
    k = d.add_mutually_exclusive_group()
    k.add_argument("--k-threshold", type=float, default=None, help="absolute magnitude threshold")
    k.add_argument("--k-fraction", type=float, default=None, help="threshold as a fraction of max|omega| (default 0.1)")
    d.add_argument("--delta-max", type=float, default=None, help="default l/6")
    d.add_argument("--n-pairs", type=int, default=dg.DEFAULT_N_PAIRS)
    d.add_argument("--quantile", type=float, default=dg.DEFAULT_QUANTILE)
    d.add_argument("--bins", type=int, default=dg.DEFAULT_N_BINS)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--beta", type=float, default=0.5, help="Riesz potential order")
    d.add_argument("--images", type=int, default=1)
    d.set_defaults(func=cmd_diagnose)

    e = sub.add_parser("exponents", help="exact exponent calculus")
    esub = e.add_subparsers(dest="what", required=True, parser_class=_Parser)
    et = esub.add_parser("tuple", help="exponent tuples of the closed weight family at r")
    et.add_argument("r", type=_exp_arg)
    es = esub.add_parser("scan", help="bounded-denominator feasibility scan")
    es.add_argument("--r", default="5/4,4/3,3/2,7/4,2", help="comma-separated rationals")
    es.add_argument("--denom", type=int, default=12)
    es.add_argument("--open", action="store_true", help="also scan without the closure constraints")
    ec = esub.add_parser("classify", help="regularity region of L^s(L^q)")
    ec.add_argument("s", type=_exp_arg)
    ec.add_argument("q", type=_exp_arg)
    ec.add_argument("--vorticity", action="store_true", help="classify a vorticity class L^s(L^r)")
    e.set_defaults(func=cmd_exponents)

    v = sub.add_parser("verify", help="run oracle suites")
    v.add_argument("suite", choices=[*verify.SUITES, "all"])
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--images", type=int, default=None)
    v.add_argument("--seeds", type=int, default=None)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"vortlab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VortlabError, OSError) as exc:
        print(f"vortlab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
