"""Exact connected and full moment tables, plus growth diagnostics.

Every operator is a weighted sum of independent Wick squares of one base
field class ``p``; its connected moments are rescaled copies of the base ones,
``C_n(A) = sum_I mult_I * w_I**n * C_n(base)``, and the full moments follow by
formal exponentiation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath

from . import __version__
from .kernel import DEFAULT_DIGITS, Rational, series_exp, to_bigfloat
from .kintegrals import k_lower_bound, k_table, k_upper_bound, k_value
from .runs import connected_moment, run_polynomials_by_flow

DEFAULT_N_MAX = 65


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    p: int
    weights: tuple  # ((weight, multiplicity), ...)

    def __post_init__(self):
        if not self.weights:
            raise ValueError("operator needs at least one weight")
        if self.p < 1 or self.p % 2 == 0:
            raise ValueError(f"p must be odd and positive, got {self.p}")
        cleaned = []
        for w, mult in self.weights:
            if int(mult) != mult or mult < 1:
                raise ValueError(f"multiplicity must be a positive integer, got {mult}")
            cleaned.append((Fraction(w), int(mult)))
        object.__setattr__(self, "weights", tuple(cleaned))

    def rescale(self, n: int) -> Fraction:
        """``sum_I mult_I * w_I**n``."""
        return sum((m * w ** n for w, m in self.weights), Fraction(0))


PHI2 = OperatorSpec("phi2", 1, ((1, 1),))
PHIDOT2 = OperatorSpec("phidot2", 3, ((1, 1),))
RHO_S = OperatorSpec("rhoS", 3, ((Fraction(1, 2), 1), (Fraction(1, 6), 3)))
E2 = OperatorSpec("E2", 3, ((Fraction(2, 3), 3),))
B2 = OperatorSpec("B2", 3, ((Fraction(2, 3), 3),))
RHO_EM = OperatorSpec("rhoEM", 3, ((Fraction(1, 3), 6),))

BUILTIN_OPERATORS = {s.name: s for s in (PHI2, PHIDOT2, RHO_S, E2, B2, RHO_EM)}


def get_operator(name: str) -> OperatorSpec:
    try:
        return BUILTIN_OPERATORS[name]
    except KeyError:
        raise ValueError(f"unknown operator {name!r}; choose from {sorted(BUILTIN_OPERATORS)}") from None


# -- base connected moments ---------------------------------------------------

@lru_cache(maxsize=None)
def _base_connected_flow(p: int, n_max: int) -> tuple:
    kt = k_table(p, max(n_max - 1, 1))
    values = {j: kt.k0(j) for j in range(1, max(n_max, 2))}
    sums = run_polynomials_by_flow(values, n_max)
    return tuple(8 ** n * sums[n] for n in range(2, n_max + 1))


def base_connected_moments(p: int, n_max: int, method: str = "flow") -> list[Fraction]:
    """Connected moments ``[C_0, ..., C_n_max]`` of the unit-weight Wick square of class ``p``.

    ``method="flow"`` evaluates ``calK_n`` along its generating flow (seconds at
    ``n_max=65``); ``method="polynomial"`` expands ``calK_n`` explicitly, which
    agrees exactly but is far slower for large ``n``.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    head = [Fraction(1), Fraction(0)]
    if method == "flow":
        return head + list(_base_connected_flow(p, n_max))
    if method == "polynomial":
        kt = k_table(p, n_max - 1)
        return head + [connected_moment(p, n, kt) for n in range(2, n_max + 1)]
    raise ValueError(f"unknown method {method!r}")


def species_connected_moments(base: Sequence[Rational], weights) -> list[Fraction]:
    """Rescale base connected moments to a weighted sum of independent copies.

    Entries 0 and 1 are passed through unchanged (the ``C_0 = 1``, ``C_1 = 0``
    bookkeeping convention).
    """
    spec_w = [(Fraction(w), int(m)) for w, m in weights]
    out = [Fraction(c) for c in base[:2]]
    for n in range(2, len(base)):
        out.append(sum((m * w ** n for w, m in spec_w), Fraction(0)) * Fraction(base[n]))
    return out


@dataclass(frozen=True)
class MomentTable:
    spec: OperatorSpec
    n_max: int
    connected: tuple
    full: tuple
    provenance: dict = field(default_factory=dict, compare=False)

    def a(self, n: int) -> Fraction:
        return self.full[n]

    def c(self, n: int) -> Fraction:
        return self.connected[n]

    def truncated(self, n_max: int) -> "MomentTable":
        if n_max > self.n_max:
            raise ValueError(f"table only holds n <= {self.n_max}")
        return MomentTable(self.spec, n_max, self.connected[:n_max + 1], self.full[:n_max + 1],
                           dict(self.provenance, n_max=n_max))


def build_moment_table(spec: OperatorSpec, n_max: int = DEFAULT_N_MAX,
                       method: str = "flow") -> MomentTable:
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    base = base_connected_moments(spec.p, n_max, method)
    return table_from_base(spec, base, method)


def table_from_base(spec: OperatorSpec, base: Sequence[Rational], method: str = "flow") -> MomentTable:
    """Moment table of ``spec`` from precomputed base connected moments ``[C_0..C_n_max]``."""
    n_max = len(base) - 1
    if n_max < 2:
        raise ValueError("need base moments through n = 2")
    connected = species_connected_moments(base, spec.weights)
    full = series_exp([0] + connected[1:]).coefficients
    provenance = {"p": spec.p, "n_max": n_max, "method": method, "version": __version__}
    return MomentTable(spec, n_max, tuple(connected), tuple(full), provenance)


# -- serialisation ------------------------------------------------------------

def rational_to_str(q: Rational) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den or 1))


def table_to_dict(table: MomentTable) -> dict:
    return {
        "operator": table.spec.name,
        "p": table.spec.p,
        "weights": [[rational_to_str(w), m] for w, m in table.spec.weights],
        "connected": [rational_to_str(c) for c in table.connected],
        "full": [rational_to_str(a) for a in table.full],
    }


def table_from_dict(data: dict) -> MomentTable:
    spec = OperatorSpec(data["operator"], int(data["p"]),
                        tuple((rational_from_str(w), int(m)) for w, m in data["weights"]))
    connected = tuple(rational_from_str(s) for s in data["connected"])
    full = tuple(rational_from_str(s) for s in data["full"])
    if len(connected) != len(full):
        raise ValueError("connected and full moment lists differ in length")
    n_max = len(full) - 1
    return MomentTable(spec, n_max, connected, full,
                       {"p": spec.p, "n_max": n_max, "source": "json"})


def table_to_json(table: MomentTable) -> str:
    return json.dumps(table_to_dict(table), indent=1)


def table_from_json(text: str) -> MomentTable:
    return table_from_dict(json.loads(text))


# -- growth diagnostics ---------------------------------------------------------

def _lstsq(rows: list, rhs: list) -> list:
    """Least squares by normal equations at the current mpmath precision."""
    A = mpmath.matrix(rows)
    b = mpmath.matrix(rhs)
    return list(mpmath.lu_solve(A.T * A, A.T * b))


@dataclass
class GrowthReport:
    hamburger_margin: list
    stieltjes_margin: list
    factorial_order_estimate: mpmath.mpf


def _residuals(ns, logs, shift) -> list:
    ys = [y - shift(n) for n, y in zip(ns, logs)]
    lnC, lnD = _lstsq([[1, n] for n in ns], ys)
    return [y - lnC - n * lnD for n, y in zip(ns, ys)]


def growth_diagnostics(moments, digits: int = DEFAULT_DIGITS) -> GrowthReport:
    """Moment-growth margins against ``n!`` and ``(2n)!`` and a factorial-order estimate.

    Margins are the residuals of ``ln a_n - ln n!`` (or ``ln (2n)!``) about the
    best line ``ln C + n ln D``; bounded margins are compatible with the
    corresponding sufficient criterion, steadily growing ones are not. The
    order estimate is the ``n ln n`` coefficient of a fit of ``ln a_n`` against
    ``(n ln n, n, ln n, 1)`` over the top third of the available indices.
    """
    seq = moments.full if isinstance(moments, MomentTable) else tuple(moments)
    if len(seq) < 11:
        raise ValueError("growth diagnostics need moments through n = 10")
    with mpmath.workdps(max(digits, 50)):
        ns = [n for n in range(2, len(seq)) if seq[n] > 0]
        logs = [mpmath.log(to_bigfloat(seq[n], max(digits, 50))) for n in ns]
        ham = _residuals(ns, logs, lambda n: mpmath.loggamma(n + 1))
        sti = _residuals(ns, logs, lambda n: mpmath.loggamma(2 * n + 1))
        top = max(5, len(ns) // 3)
        tn, tl = ns[-top:], logs[-top:]
        rows = [[n * mpmath.log(n), n, mpmath.log(n), 1] for n in tn]
        order = _lstsq(rows, tl)[0]
    return GrowthReport([+x for x in ham], [+x for x in sti], +order)


# -- asymptotic bracket -------------------------------------------------------

@dataclass
class AppendixBBounds:
    J_n: Fraction
    lower: mpmath.mpf
    upper: mpmath.mpf
    alpha_growth: mpmath.mpf
    beta_growth: mpmath.mpf


def growth_ratio_constants(p: int, digits: int = DEFAULT_DIGITS) -> tuple:
    """``(alpha, beta)`` bounding ratios of successive dominant-graph values."""
    with mpmath.workdps(digits):
        e = mpmath.e
        alpha = e * (mpmath.mpf(p + 1) / (p + 2)) ** (p + mpmath.mpf(7) / 2)
        beta = (mpmath.mpf(p + 2) / (p + 1)) ** (p + 2) / e
    return +alpha, +beta


def appendix_b_bounds(p: int, n: int, digits: int = DEFAULT_DIGITS) -> AppendixBBounds:
    """Two-sided bound on the dominant graph ``J_n = K_1 K_{n-1}``."""
    if n < 3:
        raise ValueError("bounds need n >= 3")
    k1 = k_value(p, 1, 0)
    J = k1 * k_value(p, n - 1, 0)
    lower = k1 * k_lower_bound(p, n - 1, 0)
    upper = k1 * k_upper_bound(p, n - 1, 0)
    alpha, beta = growth_ratio_constants(p, digits)
    return AppendixBBounds(J, to_bigfloat(lower, digits), to_bigfloat(upper, digits), alpha, beta)


def growth_bracket_constants(p: int, digits: int = DEFAULT_DIGITS) -> dict:
    """Stirling-limit constants of the lower and upper dominant-graph bounds.

    At ``p = 3`` they give ``C_lo D_lo**n <= 8**n J_n / (3n - 4)! <= C_hi D_hi**n``
    for large ``n``.
    """
    with mpmath.workdps(digits):
        P = mpmath.mpf(p)
        two_pi = 2 * mpmath.pi
        e = mpmath.e
        c_lo = mpmath.factorial(p + 1) / (two_pi * e) * (P / (P + 1)) ** (P + 0.5)
        d_lo = 8 * (P + 1) ** P * e / (P ** P * 2 ** (P + 1))
        c_hi = (mpmath.factorial(p + 1) * (P + 1) ** 3 / (two_pi * (P + 2) ** 3)
                * (P / (P + 2)) ** (P + 0.5))
        d_hi = 8 * (P + 2) ** (P + 2) / (2 ** (P + 1) * (P + 1) ** 2 * P ** P)
    return {"c_lo": +c_lo, "d_lo": +d_lo, "c_hi": +c_hi, "d_hi": +d_hi}


def growth_bracket(p: int, n: int, digits: int = DEFAULT_DIGITS) -> tuple:
    """``(C_lo D_lo**n, C_hi D_hi**n)``, the bracket for ``a_n / (3n - 4)!`` at ``p = 3``."""
    k = growth_bracket_constants(p, digits)
    with mpmath.workdps(digits):
        return k["c_lo"] * k["d_lo"] ** n, k["c_hi"] * k["d_hi"] ** n


__all__ = [
    "OperatorSpec", "BUILTIN_OPERATORS", "get_operator", "PHI2", "PHIDOT2", "RHO_S", "E2", "B2",
    "RHO_EM", "MomentTable", "base_connected_moments", "species_connected_moments",
    "build_moment_table", "table_from_base", "table_to_json", "table_from_json", "table_to_dict", "table_from_dict",
    "rational_to_str", "rational_from_str", "GrowthReport", "growth_diagnostics",
    "AppendixBBounds", "appendix_b_bounds", "growth_ratio_constants",
    "growth_bracket_constants", "growth_bracket", "DEFAULT_N_MAX",
]
