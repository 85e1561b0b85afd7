"""Stieltjes-test lower bounds ``y_N``, their acceleration and extrapolation.

``M(N, y)`` is the ``N x N`` matrix with entries ``a_{i+j+1} + y a_{i+j}``.
The distribution can have support in ``[-y, inf)`` only if ``M(N, y)`` is
positive semidefinite for every ``N``; ``y_N`` is the least such ``y`` at fixed
``N``, the largest real root of ``det M(N, y)``.

All root finding is exact: the leading principal minors of ``M(N, y)`` are
built as integer polynomials in ``y`` and the root is bisected on dyadic
rationals with exact sign tests.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import gmpy2
import mpmath

from .kernel import DEFAULT_DIGITS, InsufficientDepthError, Rational, check_digits
from .moments import MomentTable

FIT_DIGITS = 60


@dataclass(frozen=True)
class StieltjesMatrix:
    """``M(N, y)``; entry ``(i, j)`` is the pair ``(a_{i+j+1}, a_{i+j})`` meaning ``a_{i+j+1} + y a_{i+j}``."""

    N: int
    entries: tuple

    @classmethod
    def from_moments(cls, moments: Sequence[Rational], N: int) -> "StieltjesMatrix":
        if N < 1:
            raise ValueError("N must be positive")
        if len(moments) < 2 * N:
            raise InsufficientDepthError(f"M({N}, y) needs moments a_0..a_{2 * N - 1}")
        a = [Fraction(x) for x in moments]
        return cls(N, tuple(tuple((a[i + j + 1], a[i + j]) for j in range(N)) for i in range(N)))

    def at(self, y: Rational) -> list:
        y = Fraction(y)
        return [[c + y * d for c, d in row] for row in self.entries]

    def determinant(self) -> list:
        """Coefficients (constant first) of ``det M(N, y)``."""
        N = self.N
        moments = [self.entries[min(k, N - 1)][k - min(k, N - 1)][1] for k in range(2 * N - 1)]
        moments.append(self.entries[N - 1][N - 1][0])
        return list(minor_polynomials(tuple(moments), self.N)[self.N - 1])


# -- exact minor polynomials ----------------------------------------------------

def _bareiss_pivots(ints: Sequence[int], scale: int, y: int, N: int) -> list:
    """Leading principal minors of ``scale * M(N, y)`` at integer ``y`` by fraction-free elimination.

    Stops after the first vanishing minor (elimination cannot continue past it).
    """
    A = [[gmpy2.mpz(ints[i + j + 1] + y * ints[i + j]) for j in range(N)] for i in range(N)]
    out = []
    prev = gmpy2.mpz(1)
    for k in range(N):
        piv = A[k][k]
        out.append(piv)
        if piv == 0:
            break
        Ak = A[k]
        for i in range(k + 1, N):
            Ai = A[i]
            aik = Ai[k]
            for j in range(k + 1, N):
                Ai[j] = (Ai[j] * piv - aik * Ak[j]) // prev
        prev = piv
    return out


def _interpolate(xs: Sequence[int], ys: Sequence[int]) -> list:
    """Exact interpolating polynomial through ``(xs, ys)``, constant term first."""
    n = len(xs)
    c = [Fraction(int(v)) for v in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            c[i] = (c[i] - c[i - 1]) / (xs[i] - xs[i - j])
    coeffs = [c[-1]]
    for k in range(n - 2, -1, -1):
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, cc in enumerate(coeffs):
            nxt[i + 1] += cc
            nxt[i] -= cc * xs[k]
        nxt[0] += c[k]
        coeffs = nxt
    return coeffs


@lru_cache(maxsize=32)
def minor_polynomials(moments: tuple, N_max: int) -> tuple:
    """Exact leading principal minors ``P_1(y), ..., P_N_max(y)`` of ``M(N_max, y)``.

    Each ``P_k`` has degree ``k``. They are recovered from exact integer
    evaluations at ``N_max + 1`` integer nodes (fraction-free elimination at
    each node) followed by exact interpolation.
    """
    if len(moments) < 2 * N_max:
        raise InsufficientDepthError(f"need moments a_0..a_{2 * N_max - 1} for N = {N_max}")
    a = [Fraction(x) for x in moments[:2 * N_max]]
    scale = math.lcm(*(x.denominator for x in a))
    ints = [int(x * scale) for x in a]
    samples: list[list] = [[] for _ in range(N_max)]   # samples[k] = [(y, minor_k)]
    y = 0
    while any(len(samples[k]) < k + 2 for k in range(N_max)):
        pivots = _bareiss_pivots(ints, scale, y, N_max)
        for k, v in enumerate(pivots):
            if len(samples[k]) < k + 2:
                samples[k].append((y, v))
        y += 1
        if y > 100 * N_max + 1000:
            raise ArithmeticError("could not find enough regular interpolation nodes")
    polys = []
    for k in range(N_max):
        xs, ys = zip(*samples[k])
        coeffs = _interpolate(xs, ys)[:k + 2]
        # undo the scaling of a k+1 dimensional minor
        polys.append(tuple(c / scale ** (k + 1) for c in coeffs[:k + 2]))
    return tuple(_trim(p) for p in polys)


def _trim(p) -> tuple:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def _integer_poly(p: Sequence[Fraction]) -> list:
    d = math.lcm(*(Fraction(c).denominator for c in p))
    return [gmpy2.mpz(int(Fraction(c) * d)) for c in p]


def _dyadic_sign(P: Sequence, num, k: int) -> int:
    """Sign of ``P(num / 2**k)`` by homogeneous Horner on integers."""
    deg = len(P) - 1
    s = gmpy2.mpz(0)
    for i in range(deg, -1, -1):
        s = s * num + (P[i] << (k * (deg - i)))
    return (s > 0) - (s < 0)


def _cauchy_bound(P: Sequence) -> int:
    lead = abs(Fraction(P[-1]))
    if lead == 0:
        raise ArithmeticError("vanishing leading coefficient")
    return 1 + math.ceil(max((abs(Fraction(c)) / lead for c in P[:-1]), default=0))


def leading_minors(moments: Sequence[Rational], N: int, y: Rational) -> list:
    """Exact leading principal minors of ``M(N, y)`` at rational ``y``."""
    polys = minor_polynomials(tuple(Fraction(x) for x in moments[:2 * N]), N)
    y = Fraction(y)
    return [sum((c * y ** i for i, c in enumerate(p)), Fraction(0)) for p in polys]


def _moments_of(source) -> tuple:
    seq = source.full if isinstance(source, MomentTable) else source
    return tuple(Fraction(x) for x in seq)


def _largest_root(polys: Sequence, N: int, digits: int) -> mpmath.mpf:
    ips = [_integer_poly(p) for p in polys[:N]]
    for p in polys[:N]:
        if Fraction(p[-1]) <= 0:
            raise ArithmeticError("moment Hankel matrix is not positive definite")

    def feasible(num, k):
        return all(_dyadic_sign(P, num, k) > 0 for P in ips)

    bound = max(_cauchy_bound(p) for p in polys[:N])
    e = max(1, bound.bit_length())
    k = 0
    hi = gmpy2.mpz(1) << e
    lo = -hi
    if not feasible(hi, k) or feasible(lo, k):
        raise ArithmeticError("failed to bracket the largest root")
    bits = int(digits * 3.33) + 12
    for _ in range(bits + 4 * e + 4000):
        mid = hi + lo
        k += 1
        hi <<= 1
        lo <<= 1
        if feasible(mid, k):
            hi = mid
        else:
            lo = mid
        width = hi - lo
        if width << bits <= max(abs(hi), abs(lo)) and k > e:
            break
    with mpmath.workdps(digits + 5):
        root = (mpmath.mpf(int(hi)) + mpmath.mpf(int(lo))) / 2 / mpmath.mpf(2) ** k
    with mpmath.workdps(digits):
        return +root


def stieltjes_lower_bounds(source, Ns: Sequence[int], digits: int = DEFAULT_DIGITS) -> dict:
    """``{N: y_N}`` for every requested ``N``, sharing one polynomial build."""
    check_digits(digits)
    Ns = sorted(set(Ns))
    if not Ns:
        return {}
    if Ns[0] < 2:
        raise ValueError("N must be at least 2")
    a = _moments_of(source)
    top = Ns[-1]
    if len(a) < 2 * top:
        raise InsufficientDepthError(f"y_{top} needs moments through n = {2 * top - 1}, have {len(a) - 1}")
    polys = minor_polynomials(a[:2 * top], top)
    return {N: _largest_root(polys, N, digits) for N in Ns}


def stieltjes_lower_bound(source, N: int, digits: int = DEFAULT_DIGITS) -> mpmath.mpf:
    """Exact-bracketed ``y_N`` to ``digits`` significant digits."""
    return stieltjes_lower_bounds(source, [N], digits)[N]


@dataclass
class BoundSequence:
    values: dict
    field: str = ""
    digits: int = DEFAULT_DIGITS

    def items(self) -> list:
        return sorted(self.values.items())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "y_N"])
        for N, y in self.items():
            w.writerow([N, mpmath.nstr(y, self.digits, strip_zeros=False)])
        return buf.getvalue()


def bound_sequence(table: MomentTable, Ns: Sequence[int], digits: int = DEFAULT_DIGITS) -> BoundSequence:
    return BoundSequence(stieltjes_lower_bounds(table, Ns, digits), table.spec.name, digits)


# -- acceleration -------------------------------------------------------------

def _pairs(seq) -> list:
    if isinstance(seq, BoundSequence):
        return seq.items()
    if isinstance(seq, dict):
        return sorted(seq.items())
    return sorted(seq)


def accelerate(seq, k: Rational) -> list:
    """``(L^(k) y)_N = (N+1)/k (y_{N+1} - y_N) + y_N``, one entry shorter than ``seq``."""
    pairs = _pairs(seq)
    if len(pairs) < 2:
        raise ValueError("acceleration needs at least two entries")
    for (n0, _), (n1, _) in zip(pairs, pairs[1:]):
        if n1 != n0 + 1:
            raise ValueError(f"gap in N between {n0} and {n1}")
    k = Fraction(k)
    if k <= 0:
        raise ValueError("k must be positive")
    kk = mpmath.mpf(k.numerator) / k.denominator
    return [(n, (n + 1) / kk * (y1 - y) + y) for (n, y), (_, y1) in zip(pairs, pairs[1:])]


def accelerate_chain(seq, ks: Sequence[Rational]) -> list:
    """Apply ``L^(k)`` for each ``k`` in turn; ``ks=(1, 2)`` computes ``L^(2) L^(1) y``."""
    out = _pairs(seq)
    for k in ks:
        out = accelerate(out, k)
    return out


# -- extrapolation ------------------------------------------------------------

@dataclass
class ExtrapolationFit:
    coefficients: list
    y_infinity: mpmath.mpf
    max_residual: mpmath.mpf
    exponents: tuple = field(default=())


def extrapolate_fit(seq, exponents: Sequence[Rational], window: tuple,
                    digits: int = FIT_DIGITS) -> ExtrapolationFit:
    """Least-squares fit of ``y_N = sum_e c_e N**(-e)`` over ``window = (N_lo, N_hi)``.

    ``y_infinity`` is the coefficient of the ``e = 0`` basis function.
    """
    exps = tuple(Fraction(e) for e in exponents)
    if 0 not in exps:
        raise ValueError("basis must contain the constant term (exponent 0)")
    lo, hi = window
    data = [(n, y) for n, y in _pairs(seq) if lo <= n <= hi]
    if len(data) < len(exps):
        raise ValueError(f"window holds {len(data)} points, basis has {len(exps)} functions")
    with mpmath.workdps(max(digits, FIT_DIGITS)):
        rows = [[mpmath.mpf(n) ** (-mpmath.mpf(e.numerator) / e.denominator) for e in exps]
                for n, _ in data]
        A = mpmath.matrix(rows)
        b = mpmath.matrix([mpmath.mpf(y) for _, y in data])
        G = A.T * A
        try:
            coef = mpmath.lu_solve(G, A.T * b)
        except ZeroDivisionError:
            raise ValueError("rank-deficient design matrix") from None
        if abs(mpmath.det(G)) < mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
            raise ValueError("rank-deficient design matrix")
        resid = A * coef - b
        max_res = max(abs(r) for r in resid)
        coefficients = [+c for c in coef]
    return ExtrapolationFit(coefficients, coefficients[exps.index(0)], +max_res, exps)


__all__ = [
    "StieltjesMatrix", "minor_polynomials", "leading_minors", "stieltjes_lower_bound",
    "stieltjes_lower_bounds", "BoundSequence", "bound_sequence", "accelerate",
    "accelerate_chain", "ExtrapolationFit", "extrapolate_fit",
]
