"""Epstein zeta function of the simple cubic lattice.

``Z(s) = sum_{m in Z^3, m != 0} |m|^(-s)`` converges only for s > 3; the
value used elsewhere is its analytic continuation, evaluated with the
usual theta-function split at t = 1::

    pi^(-s/2) Gamma(s/2) Z(s) = sum' [ G(s/2, pi|m|^2) / (pi|m|^2)^(s/2)
                                      + G((3-s)/2, pi|m|^2) / (pi|m|^2)^((3-s)/2) ]
                                + 2/(s-3) - 2/s

with G the upper incomplete gamma function.  Both lattice sums converge
like exp(-pi|m|^2), so a cube of half-width 6 is far below double
precision.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

_HALF_WIDTH = 6


def upper_gamma(a: float, x: np.ndarray) -> np.ndarray:
    """Upper incomplete gamma ``Gamma(a, x)`` for ``a > -1`` and ``x > 0``."""
    x = np.asarray(x, dtype=np.float64)
    if a > 0:
        return special.gammaincc(a, x) * special.gamma(a)
    if a == 0:
        return special.exp1(x)
    if a > -1:
        # Gamma(a+1, x) = a Gamma(a, x) + x^a e^-x
        return (upper_gamma(a + 1.0, x) - x**a * np.exp(-x)) / a
    raise DomainError(f"upper_gamma implemented for a > -1 only, got {a}")


@lru_cache(maxsize=None)
def _squared_norms() -> np.ndarray:
    r = np.arange(-_HALF_WIDTH, _HALF_WIDTH + 1)
    q = (r[:, None, None] ** 2 + r[None, :, None] ** 2 + r[None, None, :] ** 2).ravel()
    return np.sort(q[q > 0]).astype(np.float64)


@lru_cache(maxsize=256)
def cubic_epstein_zeta(s: float) -> float:
    """Continued lattice sum ``Z(s)`` for -2 < s < 5, s != 3."""
    s = float(s)
    if not -2.0 < s < 5.0:
        raise DomainError(f"cubic_epstein_zeta supports -2 < s < 5, got {s}")
    if s == 3.0:
        raise DomainError("Z(s) has a pole at s = 3")
    if s == 0.0:
        return -1.0
    x = math.pi * _squared_norms()
    a, b = 0.5 * s, 0.5 * (3.0 - s)
    total = np.sum(upper_gamma(a, x) * x**-a + upper_gamma(b, x) * x**-b)
    total += 2.0 / (s - 3.0) - 2.0 / s
    return float(total * math.pi**a / special.gamma(a))
