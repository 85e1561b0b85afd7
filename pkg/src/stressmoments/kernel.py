"""Exact arithmetic primitives shared by the rest of the package.

Rationals are :class:`fractions.Fraction` (or plain ``int``), high-precision
reals are :class:`mpmath.mpf`. Moment series use the exponential generating
convention: entry ``n`` is the coefficient of ``lambda**n / n!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import mpmath
from mpmath.libmp import from_rational, round_nearest

Rational = Union[int, Fraction]
Partition = tuple  # parts in non-increasing order

DEFAULT_DIGITS = 40
MIN_DIGITS = 20


def factorial(n: int) -> int:
    if n < 0:
        raise ValueError("factorial of a negative integer")
    return math.factorial(n)


def binomial(n: int, k: int) -> int:
    """C(n, k), zero when ``k > n``."""
    if k < 0:
        raise ValueError("binomial with negative k")
    return math.comb(n, k)


def to_bigfloat(q: Rational, digits: int = DEFAULT_DIGITS) -> mpmath.mpf:
    """Correctly rounded conversion of an exact rational at ``digits`` digits."""
    q = Fraction(q)
    prec = mpmath.libmp.dps_to_prec(digits)
    return mpmath.mp.make_mpf(from_rational(q.numerator, q.denominator, prec, round_nearest))


def check_digits(digits: int) -> int:
    if digits < MIN_DIGITS:
        raise ValueError(f"precision must be at least {MIN_DIGITS} digits, got {digits}")
    return digits


# -- partitions ---------------------------------------------------------------

def partitions(n: int, largest: int | None = None) -> Iterator[Partition]:
    """Partitions of ``n`` as non-increasing tuples, in descending lexicographic order."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def partitions_even_parts(n: int) -> list[Partition]:
    """All partitions of ``n`` having an even number of parts.

    Ordered lexicographically on the non-increasing part lists, largest first,
    so ``n=4`` gives ``[(3, 1), (2, 2), (1, 1, 1, 1)]``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    return [p for p in partitions(n) if len(p) % 2 == 0]


def count_partitions_by_parity(n: int) -> tuple[int, int]:
    """(even-part-count, odd-part-count) partition numbers of ``n`` by dynamic programming."""
    # table[k][m]: partitions of m with exactly k parts is too big; track parity only
    even = [0] * (n + 1)
    odd = [0] * (n + 1)
    even[0] = 1
    for part in range(1, n + 1):
        # adding one copy of ``part`` flips the parity of the part count
        for m in range(part, n + 1):
            e, o = even[m - part], odd[m - part]
            even[m] += o
            odd[m] += e
    return even[n], odd[n]


# -- formal power series ------------------------------------------------------

@dataclass(frozen=True)
class FormalSeries:
    """Truncated exponential generating function with exact coefficients."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))

    @property
    def truncation_order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficients[n]

    def __len__(self) -> int:
        return len(self.coefficients)

    @classmethod
    def zero(cls, order: int) -> "FormalSeries":
        return cls((0,) * (order + 1))


def _as_series(s: FormalSeries | Sequence[Rational]) -> FormalSeries:
    return s if isinstance(s, FormalSeries) else FormalSeries(tuple(s))


def series_exp(w: FormalSeries | Sequence[Rational]) -> FormalSeries:
    """Exponential of a connected-moment series, i.e. cumulants to moments.

    Uses ``a_n = sum_{k=1}^n C(n-1, k-1) c_k a_{n-k}``.
    """
    w = _as_series(w)
    c = w.coefficients
    if c[0] != 0:
        raise ValueError("series_exp needs a zero constant term")
    a = [Fraction(1)] + [Fraction(0)] * w.truncation_order
    for n in range(1, len(c)):
        a[n] = sum((math.comb(n - 1, k - 1) * c[k] * a[n - k] for k in range(1, n + 1) if c[k]),
                   Fraction(0))
    return FormalSeries(tuple(a))


def series_log(m: FormalSeries | Sequence[Rational]) -> FormalSeries:
    """Inverse of :func:`series_exp` (moments to cumulants)."""
    m = _as_series(m)
    a = m.coefficients
    if a[0] != 1:
        raise ValueError("series_log needs constant term 1")
    c = [Fraction(0)] * len(a)
    for n in range(1, len(a)):
        c[n] = a[n] - sum((math.comb(n - 1, k - 1) * c[k] * a[n - k] for k in range(1, n)),
                          Fraction(0))
    return FormalSeries(tuple(c))


# -- errors -------------------------------------------------------------------

class InsufficientDepthError(ValueError):
    """Not enough precomputed moments for the requested quantity."""


class ConvergenceError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""
