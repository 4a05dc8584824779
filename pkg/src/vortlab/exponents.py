"""Exact rational calculus over Lebesgue exponents.

Exponents are ``int``/``Fraction`` values or ``INF``; floats are refused so
that every identity here holds as literal equality.  The central object is
the interpolation system that splits ``||w||_{q'r}`` and ``||w||_{r_hat}``
between the anchor norms ``L^r``, ``L^2`` and ``L^{3r}``; imposing the
closure constraints

    theta' + theta r = 1,    alpha' + alpha r = r / 2

pins the Hoelder exponent of the vorticity direction to 1/2 for every r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .errors import DomainError

INF = math.inf
Exponent = Union[int, Fraction, float]  # float only for INF

HALF = Fraction(1, 2)


def as_exponent(x) -> Union[Fraction, float]:
    """Coerce to ``Fraction`` or ``INF``.

    Accepts ints, Fractions, ``INF`` and strings such as ``"3/2"`` or
    ``"inf"``.  Finite floats are rejected.
    """
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return INF
        if any(c in s for c in ".e"):
            raise DomainError(f"exponent {x!r} must be a rational like '3/2' or 'inf'")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse exponent {x!r}") from exc
    if isinstance(x, float):
        if x == INF:
            return INF
        raise DomainError(f"floating exponent {x!r} refused; pass a Fraction")
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    raise DomainError(f"unsupported exponent type {type(x).__name__}")


def reciprocal(x) -> Fraction:
    """``1/x`` with ``1/INF = 0``."""
    x = as_exponent(x)
    if x == INF:
        return Fraction(0)
    if x == 0:
        raise DomainError("reciprocal of zero exponent")
    return 1 / x


def _from_reciprocal(inv: Fraction) -> Union[Fraction, float]:
    return INF if inv == 0 else 1 / inv


def _positive(name, x):
    x = as_exponent(x)
    if not x > 0:
        raise DomainError(f"{name} must be positive, got {x}")
    return x


# --------------------------------------------------------------------------
# regularity classes


def scaling_index(s, q) -> Fraction:
    """``2/s + 3/q``; a velocity in ``L^s(L^q)`` with index <= 1 is strong."""
    return 2 * reciprocal(_positive("s", s)) + 3 * reciprocal(_positive("q", q))


def sobolev_q_of_r(r) -> Fraction:
    """Embedding exponent with ``1/q = 1/r - 1/3``; needs ``1 < r < 3``."""
    r = as_exponent(r)
    if not (r != INF and 1 < r < 3):
        raise DomainError(f"r must lie in (1, 3), got {r}")
    return 3 * r / (3 - r)


STRONG = "strong"
NOT_IMPLIED = "not-implied"
TARGET = "target-zone"
WEAK_KNOWN = "weak-known"
UNKNOWN = "unknown"


def strong_by_vorticity(s, r) -> str:
    """``strong`` when ``2/s + 3/r <= 2`` for vorticity in ``L^s(L^r)``."""
    value = 2 * reciprocal(_positive("s", s)) + 3 * reciprocal(_positive("r", r))
    return STRONG if value <= 2 else NOT_IMPLIED


def _region(value: Fraction, strong_max: Fraction, weak: Fraction) -> str:
    if value <= strong_max:
        return STRONG
    if value < weak:
        return TARGET
    if value == weak:
        return WEAK_KNOWN
    return UNKNOWN


def classify_open_problem(s, q) -> str:
    """Region of a velocity class ``L^s(L^q)`` by ``2/s + 3/q``.

    ``<= 1`` strong, ``(1, 3/2)`` the open target zone, ``= 3/2`` the
    level every weak solution reaches, above that unknown.
    """
    return _region(scaling_index(s, q), Fraction(1), Fraction(3, 2))


def vorticity_region(s, r) -> str:
    """Region of a vorticity class ``L^s(L^r)`` by ``2/s + 3/r``.

    ``<= 2`` strong, ``(2, 5/2)`` target zone, ``= 5/2`` weak-known.
    """
    value = 2 * reciprocal(_positive("s", s)) + 3 * reciprocal(_positive("r", r))
    return _region(value, Fraction(2), Fraction(5, 2))


def paired_regions(s, r) -> tuple:
    """Vorticity region of ``L^s(L^r)`` next to the velocity region of
    ``L^s(L^q)`` with ``q`` the Sobolev image of ``r``.

    The two are close but not asserted equal: the vorticity class is the
    stronger assumption.  Returns ``(vorticity_label, q, velocity_label)``.
    """
    q = sobolev_q_of_r(r)
    return vorticity_region(s, r), q, classify_open_problem(s, q)


# --------------------------------------------------------------------------
# Riesz and Hoelder exponent relations


def q_prime_of(r_hat, beta) -> Union[Fraction, float]:
    """Conjugate exponent with ``1/q' = 1 - 1/r_hat + beta/3``."""
    inv = 1 - reciprocal(_positive("r_hat", r_hat)) + as_exponent(beta) / 3
    if inv < 0:
        raise DomainError(f"1/q' = {inv} is negative")
    return _from_reciprocal(inv)


def riesz_q_of(r_hat, beta) -> Union[Fraction, float]:
    """Target exponent of the Riesz potential, ``1/q = 1/r_hat - beta/3``."""
    inv = reciprocal(_positive("r_hat", r_hat)) - as_exponent(beta) / 3
    if inv < 0:
        raise DomainError(f"1/q = {inv} is negative (beta too large for r_hat)")
    return _from_reciprocal(inv)


def critical_r_of_beta(beta) -> Fraction:
    """``r = 3 / (beta + 1)``: the vorticity integrability paired with a
    beta-Hoelder direction field."""
    beta = as_exponent(beta)
    if beta == INF or beta <= -1:
        raise DomainError(f"beta must exceed -1, got {beta}")
    return 3 / (beta + 1)


# --------------------------------------------------------------------------
# interpolation system


@dataclass(frozen=True)
class InterpolationWeights:
    """Convex weights on (L^r, L^2, L^{3r}) for the two interpolated norms."""

    alpha: Fraction
    theta: Fraction
    gamma: Fraction
    alpha_p: Fraction
    theta_p: Fraction
    gamma_p: Fraction

    def __post_init__(self):
        for name in ("alpha", "theta", "gamma", "alpha_p", "theta_p", "gamma_p"):
            v = as_exponent(getattr(self, name))
            if v == INF or not 0 <= v <= 1:
                raise DomainError(f"weight {name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)
        if self.alpha + self.theta + self.gamma != 1 or self.alpha_p + self.theta_p + self.gamma_p != 1:
            raise DomainError("each weight triple must sum to 1")

    @classmethod
    def from_free(cls, alpha, theta, alpha_p, theta_p) -> "InterpolationWeights":
        a, t, ap, tp = (as_exponent(v) for v in (alpha, theta, alpha_p, theta_p))
        return cls(a, t, 1 - a - t, ap, tp, 1 - ap - tp)

    @property
    def free(self) -> tuple:
        return (self.alpha, self.theta, self.alpha_p, self.theta_p)


def natural_weights() -> InterpolationWeights:
    """alpha = 1/2, theta = 0, theta' = 1: closed for every r."""
    return InterpolationWeights.from_free(HALF, 0, 0, 1)


def _check_r(r) -> Fraction:
    r = as_exponent(r)
    if r == INF or not 1 < r <= 2:
        raise DomainError(f"r must lie in (1, 2], got {r}")
    return r


def interpolation_exponents(r, w: InterpolationWeights):
    """Return ``(q'r, r_hat)`` from the interpolation identities::

        1/(q'r)  = alpha/r  + theta/2  + gamma/(3r)
        1/r_hat  = alpha'/r + theta'/2 + gamma'/(3r)
    """
    r = _positive("r", r)
    inv_qr = w.alpha / r + w.theta / 2 + w.gamma / (3 * r)
    inv_rh = w.alpha_p / r + w.theta_p / 2 + w.gamma_p / (3 * r)
    return 1 / inv_qr, 1 / inv_rh


def beta_of(r, w: InterpolationWeights) -> Fraction:
    """Closed form ``(2/r) A + (3/2 - 1/r) T - 2 + 1/r`` with
    ``A = alpha' + alpha r`` and ``T = theta' + theta r``."""
    r = _positive("r", r)
    a = w.alpha_p + w.alpha * r
    t = w.theta_p + w.theta * r
    return 2 / r * a + (Fraction(3, 2) - 1 / r) * t - 2 + 1 / r


def beta_by_chain(r, w: InterpolationWeights) -> Fraction:
    """The same beta obtained by composing the interpolation identities with
    ``1/q' = 1 - 1/r_hat + beta/3`` and solving for beta."""
    r = _positive("r", r)
    qr, r_hat = interpolation_exponents(r, w)
    q_prime = qr / r
    return 3 * (1 / q_prime - 1 + 1 / r_hat)


def is_closed(r, w: InterpolationWeights) -> bool:
    r = as_exponent(r)
    return w.theta_p + w.theta * r == 1 and w.alpha_p + w.alpha * r == r / 2


@dataclass(frozen=True)
class ExponentTuple:
    r: Fraction
    beta: Fraction
    r_hat: Fraction
    q: Union[Fraction, float]
    q_prime: Union[Fraction, float]
    consistent: bool

    def as_tuple(self) -> tuple:
        return (self.r, self.beta, self.r_hat, self.q, self.q_prime)


def exponent_tuple(r, w: InterpolationWeights) -> ExponentTuple:
    """Chain the relations into ``(r, beta, r_hat, q, q')`` and recheck them."""
    r = _positive("r", r)
    qr, r_hat = interpolation_exponents(r, w)
    beta = beta_by_chain(r, w)
    q_prime = q_prime_of(r_hat, beta)
    try:
        q = riesz_q_of(r_hat, beta)
    except DomainError:
        return ExponentTuple(r, beta, r_hat, INF, q_prime, False)
    consistent = (
        q_prime != INF
        and q_prime * r == qr
        and reciprocal(q_prime) == 1 - 1 / r_hat + beta / 3
        and reciprocal(q) == 1 / r_hat - beta / 3
        and beta == beta_of(r, w)
    )
    return ExponentTuple(r, beta, r_hat, q, q_prime, consistent)


# --------------------------------------------------------------------------
# feasible set under the closure constraints


class ClosureFeasibleSet:
    """Weights satisfying box, simplex and closure constraints at fixed r.

    With ``theta' = 1 - theta r`` and ``alpha' = r/2 - alpha r`` the set is
    the polygon ``0 <= alpha <= 1/2``, ``0 <= theta <= 1/r``,
    ``1/2 <= alpha + theta <= 1`` in the free pair (alpha, theta).
    """

    def __init__(self, r):
        self.r = _check_r(r)
        if not self.vertices():
            raise DomainError(f"closure feasible set is empty at r={self.r}")

    def weights(self, alpha, theta) -> InterpolationWeights:
        a, t = as_exponent(alpha), as_exponent(theta)
        return InterpolationWeights.from_free(a, t, self.r / 2 - a * self.r, 1 - t * self.r)

    def _inside(self, a: Fraction, t: Fraction) -> bool:
        r = self.r
        return 0 <= a <= HALF and 0 <= t <= 1 / r and HALF <= a + t <= 1

    def __contains__(self, w: InterpolationWeights) -> bool:
        return is_closed(self.r, w)

    def vertices(self) -> list:
        """Corners of the polygon, exact, sorted."""
        r = self.r
        # lines c_a * alpha + c_t * theta = c
        lines = [(1, 0, 0), (1, 0, HALF), (0, 1, 0), (0, 1, 1 / r), (1, 1, HALF), (1, 1, 1)]
        pts = set()
        for i, (a1, t1, c1) in enumerate(lines):
            for a2, t2, c2 in lines[i + 1 :]:
                det = a1 * t2 - a2 * t1
                if det == 0:
                    continue
                a = Fraction(c1 * t2 - c2 * t1) / det
                t = Fraction(a1 * c2 - a2 * c1) / det
                if self._inside(a, t):
                    pts.add((a, t))
        return sorted(pts)

    def theta_range(self, alpha) -> Optional[tuple]:
        a = as_exponent(alpha)
        if not 0 <= a <= HALF:
            return None
        lo, hi = max(Fraction(0), HALF - a), min(1 / self.r, 1 - a)
        return (lo, hi) if lo <= hi else None

    def sample(self, count: int, seed: int = 0, resolution: int = 720) -> list:
        """Deterministic exact samples: rationals with denominators dividing
        ``resolution`` (alpha) and a ``resolution``-th of the theta range."""
        rng = np.random.default_rng(seed)
        out = []
        while len(out) < count:
            a = Fraction(int(rng.integers(0, resolution // 2 + 1)), resolution)
            rng_t = self.theta_range(a)
            if rng_t is None:
                continue
            lo, hi = rng_t
            t = lo + (hi - lo) * Fraction(int(rng.integers(0, resolution + 1)), resolution)
            out.append(self.weights(a, t))
        return out


def closure_feasible_set(r) -> ClosureFeasibleSet:
    return ClosureFeasibleSet(r)


# --------------------------------------------------------------------------
# bounded-denominator scan


def farey(bound: int) -> list:
    """All fractions in [0, 1] with denominator <= bound, sorted."""
    if bound < 1:
        raise DomainError("denominator bound must be >= 1")
    return sorted({Fraction(p, q) for q in range(1, bound + 1) for p in range(q + 1)})


@dataclass(frozen=True)
class ScanRow:
    r: Fraction
    n_closed: int
    closed_betas: frozenset
    chain_betas: frozenset
    n_all: int
    open_beta_min: Optional[Fraction]
    open_beta_max: Optional[Fraction]
    open_beta_count: int
    open_contains: dict


@dataclass(frozen=True)
class ScanReport:
    rows: tuple
    denominator_bound: int

    @property
    def attainable_closed(self) -> frozenset:
        """Union over r of the beta values reached under closure."""
        out = set()
        for row in self.rows:
            out |= row.closed_betas
        return frozenset(out)

    @property
    def chain_pairs(self) -> frozenset:
        return frozenset((row.r, b) for row in self.rows for b in row.chain_betas)


def _closed_scan(r: Fraction, grid: list, bound: int):
    fs = ClosureFeasibleSet(r)
    betas, chain = set(), set()
    count = 0
    for a in grid:
        if a > HALF:
            break
        for t in grid:
            if not fs._inside(a, t):
                continue
            ap, tp = r / 2 - a * r, 1 - t * r
            if ap.denominator > bound or tp.denominator > bound:
                continue
            w = fs.weights(a, t)
            count += 1
            betas.add(beta_of(r, w))
            tup = exponent_tuple(r, w)
            if tup.consistent and tup.q_prime >= 1 and tup.q > 1:
                chain.add(tup.beta)
    return count, betas, chain


def _open_scan(r: Fraction, grid: list, probes: Iterable[Fraction]):
    """All weight tuples in the grid with both simplex constraints, no
    closure.  Vectorised over the common denominator of the grid."""
    lcm = math.lcm(*(f.denominator for f in grid))
    nums = np.array([f.numerator * (lcm // f.denominator) for f in grid], dtype=np.int64)
    pa, pt = np.meshgrid(nums, nums, indexing="ij")
    ok = pa + pt <= lcm
    pairs_a, pairs_t = pa[ok], pt[ok]  # numerators of (alpha, theta) over lcm
    p, q = r.numerator, r.denominator
    # beta = [2q(2q A' + 2p A) + (3p - 2q)(q T' + p T) + 2 q L (q - 2p)] / (2 p q L)
    # with A = alpha, T = theta, primes the second triple, all over L = lcm
    denom = 2 * p * q * lcm
    base = 2 * q * lcm * (q - 2 * p)
    left = 4 * q * q * pairs_a + (3 * p - 2 * q) * q * pairs_t  # primed part
    right = 4 * q * p * pairs_a + (3 * p - 2 * q) * p * pairs_t  # unprimed part
    values = np.unique((left[:, None] + right[None, :] + base).ravel())
    lo = Fraction(int(values[0]), denom)
    hi = Fraction(int(values[-1]), denom)
    contains = {}
    for b in probes:
        num = b * denom
        contains[b] = bool(num.denominator == 1 and np.any(values == int(num)))
    return pairs_a.size**2, lo, hi, int(values.size), contains


def feasibility_scan(
    r_grid: Iterable, denominator_bound: int, include_open: bool = True, probes=(Fraction(0), HALF)
) -> ScanReport:
    """Enumerate bounded-denominator weights for each r.

    Under closure, (alpha, theta) run over all fractions with denominator
    <= bound and the derived alpha', theta' must also have denominator <=
    bound.  The open scan drops closure and records the spread of beta.
    """
    grid = farey(denominator_bound)
    rows = []
    for r in r_grid:
        r = _check_r(r)
        n_closed, betas, chain = _closed_scan(r, grid, denominator_bound)
        if include_open:
            n_all, lo, hi, cnt, contains = _open_scan(r, grid, [as_exponent(b) for b in probes])
        else:
            n_all, lo, hi, cnt, contains = 0, None, None, 0, {}
        rows.append(ScanRow(r, n_closed, frozenset(betas), frozenset(chain), n_all, lo, hi, cnt, contains))
    return ScanReport(tuple(rows), denominator_bound)


def format_exponent(x) -> str:
    x = as_exponent(x)
    return "inf" if x == INF else str(x)


def format_set(values) -> str:
    return "{" + ", ".join(format_exponent(v) for v in sorted(values)) + "}"


def format_scan(report: ScanReport) -> str:
    lines = [f"denominator bound: {report.denominator_bound}"]
    for row in report.rows:
        lines.append(
            f"r={format_exponent(row.r)}: {row.n_closed} closed tuples, beta {format_set(row.closed_betas)}; "
            f"full chain beta {format_set(row.chain_betas)}"
        )
        if row.open_beta_min is not None:
            probes = ", ".join(f"{format_exponent(b)}:{'yes' if v else 'no'}" for b, v in row.open_contains.items())
            lines.append(
                f"  without closure: {row.n_all} tuples, {row.open_beta_count} distinct beta in "
                f"[{row.open_beta_min}, {row.open_beta_max}] (contains {probes})"
            )
    lines.append(f"attainable beta under scaling constraints: {format_set(report.attainable_closed)}")
    return "\n".join(lines)
