"""Run-structure polynomials of the connected graphs.

A connected graph on ``n`` ordered vertices is labelled by a permutation
``sigma`` of ``1..n`` with ``sigma(1) = 1`` and ``sigma(2) < sigma(n)``. Its
value factorises over the maximal monotone runs of
``sigma(1), ..., sigma(n), sigma(n+1) = 1``, a run of length ``l``
contributing ``K_l``. Summing over graphs gives the polynomial ``calK_n`` in
``K_1..K_{n-1}``, built from ``calK_2 = K_1^2 / 2`` by the derivation

    D = sum_i K_{i+1} d/dK_i + sum_{i,j} K_1 K_i K_j d/dK_{i+j}.

Monomials are keyed by partitions (non-increasing tuples of run lengths).
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .kernel import InsufficientDepthError, Partition, Rational
from .kintegrals import KTable


@dataclass(frozen=True)
class RunPolynomial:
    n: int
    terms: Mapping[Partition, Rational]

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, parts: Sequence[int]) -> Rational:
        return self.terms.get(tuple(sorted(parts, reverse=True)), 0)

    def coefficient_sum(self) -> Rational:
        return sum(self.terms.values())

    def evaluate(self, values: Mapping[int, Rational]) -> Fraction:
        """Substitute ``K_j -> values[j]``."""
        powers: dict[tuple[int, int], Fraction] = {}
        total = Fraction(0)
        for parts, coef in self.terms.items():
            term = Fraction(coef)
            for j, m in Counter(parts).items():
                key = (j, m)
                if key not in powers:
                    powers[key] = Fraction(values[j]) ** m
                term *= powers[key]
            total += term
        return total


def _insert(parts: list, value: int) -> None:
    # parts is non-increasing
    lo, hi = 0, len(parts)
    while lo < hi:
        mid = (lo + hi) // 2
        if parts[mid] >= value:
            lo = mid + 1
        else:
            hi = mid
    parts.insert(lo, value)


def _apply_derivation(poly: dict) -> dict:
    out: defaultdict = defaultdict(int)
    for parts, coef in poly.items():
        seen = Counter(parts)
        for i, mult in seen.items():
            weight = coef * mult
            rest = list(parts)
            rest.remove(i)
            # K_{i+1} d/dK_i
            grown = rest.copy()
            _insert(grown, i + 1)
            out[tuple(grown)] += weight
            # K_1 K_a K_b d/dK_i over ordered splits a + b = i
            for a in range(1, i):
                split = rest.copy()
                _insert(split, a)
                _insert(split, i - a)
                _insert(split, 1)
                out[tuple(split)] += weight
    return dict(out)


# doubled polynomials 2*calK_n, all integer; index n
_SWEEP: list = [None, None, {(1, 1): 1}]


def run_polynomial(n: int) -> RunPolynomial:
    """``calK_n`` by repeated application of the derivation, memoised across calls."""
    if n < 2:
        raise ValueError("run polynomials start at n = 2")
    while len(_SWEEP) <= n:
        _SWEEP.append(_apply_derivation(_SWEEP[-1]))
    doubled = _SWEEP[n]
    if n == 2:
        return RunPolynomial(2, {(1, 1): Fraction(1, 2)})
    return RunPolynomial(n, {k: v // 2 for k, v in doubled.items()})


# -- brute force --------------------------------------------------------------

def run_lengths(sigma: Sequence[int]) -> list[int]:
    """Lengths of the maximal monotone runs of ``sigma`` closed by ``sigma(n+1) = sigma(1)``."""
    seq = list(sigma) + [sigma[0]]
    ups = [b > a for a, b in zip(seq, seq[1:])]
    return [len(list(g)) for _, g in itertools.groupby(ups)]


@dataclass(frozen=True)
class GraphPermutation:
    sigma: tuple

    def __post_init__(self):
        n = len(self.sigma)
        if sorted(self.sigma) != list(range(1, n + 1)):
            raise ValueError(f"{self.sigma} is not a permutation of 1..{n}")
        if self.sigma[0] != 1:
            raise ValueError("sigma(1) must be 1")
        if n > 2 and not self.sigma[1] < self.sigma[-1]:
            raise ValueError("need sigma(2) < sigma(n)")

    def runs(self) -> list[int]:
        return run_lengths(self.sigma)


def graph_permutations(n: int):
    for tail in itertools.permutations(range(2, n + 1)):
        if n == 2 or tail[0] < tail[-1]:
            yield (1,) + tail


def brute_force_run_census(n: int) -> RunPolynomial:
    """Tally run-length multisets over all graph permutations on ``n`` vertices."""
    if not 2 <= n <= 10:
        raise ValueError("census is limited to 2 <= n <= 10")
    tally: Counter = Counter()
    for sigma in graph_permutations(n):
        tally[tuple(sorted(run_lengths(sigma), reverse=True))] += 1
    if n == 2:
        # the single n = 2 graph is counted with weight 1/2
        return RunPolynomial(2, {k: Fraction(v, 2) for k, v in tally.items()})
    return RunPolynomial(n, dict(tally))


# -- evaluation ---------------------------------------------------------------

def connected_moment(p: int, n: int, ktable: KTable) -> Fraction:
    """``C_n = 8^n calK_n(K_1^(0), ..., K_{n-1}^(0))`` via the explicit polynomial."""
    if ktable.p != p:
        raise ValueError(f"K table is for p={ktable.p}, not p={p}")
    if n < 2:
        raise ValueError("connected moments are indexed from n = 2")
    if ktable.max_n < n - 1:
        raise InsufficientDepthError(f"K table depth {ktable.max_n} too small for C_{n}")
    values = {j: ktable.k0(j) for j in range(1, n)}
    return 8 ** n * run_polynomial(n).evaluate(values)


def run_polynomials_by_flow(values: Mapping[int, Rational], n_max: int) -> dict[int, Fraction]:
    """Values of ``calK_n`` for ``2 <= n <= n_max`` without expanding the polynomials.

    ``D`` is a derivation, so ``sum_m t^m/m! D^m f`` is ``f`` transported along
    the flow ``dK_s/dt = K_{s+1} + K_1 sum_{i+j=s} K_i K_j``. Solving that
    triangular system as power series in ``t`` gives
    ``calK_n = (n-2)! [t^(n-2)] K_1(t)^2 / 2``.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    top = n_max - 1
    # coef[i][m] = [t^m] K_i(t); K_i is needed to order top - i
    coef = {i: [Fraction(values[i])] for i in range(1, top + 1)}
    quad: dict[int, list] = {i: [] for i in range(2, top + 1)}   # [t^m] sum_{j+l=i} K_j K_l
    for m in range(0, n_max - 2):
        for i in range(2, top + 1 - m):
            acc = Fraction(0)
            for j in range(1, i):
                cj, cl = coef[j], coef[i - j]
                for u in range(m + 1):
                    acc += cj[u] * cl[m - u]
            quad[i].append(acc)
        k1 = coef[1]
        for i in range(1, top - m):
            nxt = coef[i + 1][m]
            if i >= 2:
                qi = quad[i]
                nxt += sum((k1[w] * qi[m - w] for w in range(m + 1)), Fraction(0))
            coef[i].append(nxt / (m + 1))
    k1 = coef[1]
    out = {}
    for n in range(2, n_max + 1):
        m = n - 2
        square = sum((k1[u] * k1[m - u] for u in range(m + 1)), Fraction(0))
        out[n] = square / 2 * math.factorial(m)
    return out
