"""Run-factor integrals ``K_n^(r)`` for Lorentzian time sampling.

``K_n^(r) = 2^r/r! * int_{(R+)^n} k_1^{p+r} (k_2...k_n)^p
            exp(-k_1 - sum |k_{i+1}-k_i| - k_n) dk``

computed exactly from the one-step reduction

``K_n^(r) = p!/2^{p+1} * C(p+r, p) * sum_{r'=0}^{p+r+1} K_{n-1}^(r')``

with ``K_1^(r) = p!/2^{p+1} * C(p+r, p)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math
import warnings
from math import comb, factorial

import mpmath
from scipy import integrate


def _check_p(p: int) -> None:
    if p < 1 or p % 2 == 0:
        raise ValueError(f"p must be an odd positive integer, got {p}")


def r_depth(p: int, max_n: int, n: int) -> int:
    """Largest ``r`` kept at level ``n`` so that every ``K_m^(0)``, ``m <= max_n``, is reachable."""
    return (max_n - n + 1) * (p + 1)


@dataclass(frozen=True)
class KTable:
    p: int
    max_n: int
    values: dict = field(repr=False)        # n -> tuple of K_n^(r), r = 0..r_depth
    prefix_sums: dict = field(repr=False)   # n -> tuple of sum_{r'<R} K_n^(r'), R = 0..r_depth+1

    def __call__(self, n: int, r: int = 0) -> Fraction:
        try:
            return self.values[n][r]
        except (KeyError, IndexError):
            raise ValueError(f"K_{n}^({r}) not stored in a table with max_n={self.max_n}") from None

    def k0(self, n: int) -> Fraction:
        return self(n, 0)

    def prefix_sum(self, n: int, R: int) -> Fraction:
        """``sum_{r'=0}^{R} K_n^(r')``."""
        return self.prefix_sums[n][R + 1]


def _prefix(vals) -> tuple:
    out = [Fraction(0)]
    for v in vals:
        out.append(out[-1] + v)
    return tuple(out)


@lru_cache(maxsize=None)
def k_table(p: int, max_n: int) -> KTable:
    _check_p(p)
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    unit = Fraction(factorial(p), 2 ** (p + 1))
    values = {1: tuple(unit * comb(p + r, p) for r in range(r_depth(p, max_n, 1) + 1))}
    prefix = {1: _prefix(values[1])}
    for n in range(2, max_n + 1):
        below = prefix[n - 1]
        # sum_{r'=0}^{p+r+1} K_{n-1}^(r') sits at prefix index p+r+2
        values[n] = tuple(unit * comb(p + r, p) * below[p + r + 2]
                          for r in range(r_depth(p, max_n, n) + 1))
        prefix[n] = _prefix(values[n])
    return KTable(p, max_n, values, prefix)


def k_value(p: int, n: int, r: int = 0) -> Fraction:
    """Exact ``K_n^(r)``."""
    _check_p(p)
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    # a table of depth n stores r up to (n - m + 1)(p+1) at level m; grow it until r fits at level n
    depth = n + max(0, -(-r // (p + 1)) - 1)
    return k_table(p, depth)(n, r)


def k_numeric_oracle(p: int, n: int, r: int = 0, digits: int = 20) -> mpmath.mpf:
    """Direct quadrature of the defining integral, for ``n <= 3``.

    Each inner integral is split where ``|k_{i+1} - k_i|`` has its kink.
    ``n = 3`` runs nested QUADPACK in double precision (about 13 good digits
    whatever ``digits`` asks for); nested tanh-sinh is far too slow there.
    """
    _check_p(p)
    if not 1 <= n <= 3:
        raise ValueError("quadrature oracle only supports n <= 3")
    with mpmath.workdps(digits + 5):
        pref = mpmath.mpf(2) ** r / mpmath.factorial(r)
        exp = mpmath.exp
        inf = mpmath.inf
        if n == 1:
            val = mpmath.quad(lambda k1: k1 ** (p + r) * exp(-2 * k1), [0, inf])
        elif n == 2:
            def outer(k1):
                inner = mpmath.quad(lambda k2: k2 ** p * exp(-abs(k2 - k1) - k2), [0, k1, inf])
                return k1 ** (p + r) * exp(-k1) * inner
            val = mpmath.quad(outer, [0, inf])
        else:
            val = mpmath.mpf(_triple_quadpack(p, r))
        result = pref * val
    return +result


def _triple_quadpack(p: int, r: int) -> float:
    e = math.exp
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)

    def inner(k2):
        lo = integrate.quad(lambda k3: k3 ** p * e(-k2), 0, k2, **opts)[0]
        hi = integrate.quad(lambda k3: k3 ** p * e(k2 - 2 * k3), k2, math.inf, **opts)[0]
        return lo + hi

    def middle(k1):
        lo = integrate.quad(lambda k2: k2 ** p * e(k2 - k1) * inner(k2), 0, k1, **opts)[0]
        hi = integrate.quad(lambda k2: k2 ** p * e(k1 - k2) * inner(k2), k1, math.inf, **opts)[0]
        return k1 ** (p + r) * e(-k1) * (lo + hi)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(middle, 0, math.inf, **opts)[0]


# -- two-sided bounds on K_n^(r) ----------------------------------

def _prefactor(p: int, n: int) -> Fraction:
    return Fraction(factorial(n * (p + 1)), factorial(n) * (2 ** (p + 1) * (p + 1)) ** n)


def k_lower_factor(p: int, n: int, r: int) -> Fraction:
    """``L_n^(r)``; the lower bound on ``K_n^(r)`` is ``C(n(p+1)-1+r, n(p+1)-1) * L_n^(r)``."""
    out = _prefactor(p, n)
    for k in range(1, n):
        out *= Fraction(r + n * (p + 1), r + k * (p + 1))
    return out


def k_upper_factor(p: int, n: int, r: int) -> Fraction:
    """``U_n^(r)``; the upper bound on ``K_n^(r)`` is ``C(n(p+2)-2+r, n(p+1)-1) * U_n^(r)``."""
    out = _prefactor(p, n)
    for k in range(0, n - 1):
        for q in range(1, p + 1):
            out *= Fraction(k * (p + 1) + r + q, k * p + r + n + q - 1)
    return out


def k_lower_bound(p: int, n: int, r: int) -> Fraction:
    return comb(n * (p + 1) - 1 + r, n * (p + 1) - 1) * k_lower_factor(p, n, r)


def k_upper_bound(p: int, n: int, r: int) -> Fraction:
    return comb(n * (p + 2) - 2 + r, n * (p + 1) - 1) * k_upper_factor(p, n, r)


__all__ = [
    "KTable", "k_table", "k_value", "k_numeric_oracle", "r_depth",
    "k_lower_factor", "k_upper_factor", "k_lower_bound", "k_upper_bound",
]
