"""Shared test helpers: cached 65-moment tables, bound sequences and rounding."""
from __future__ import annotations

import functools
from decimal import ROUND_HALF_UP, Context, Decimal, localcontext
from fractions import Fraction

import mpmath

from stressmoments.analysis import stieltjes_lower_bounds
from stressmoments.moments import build_moment_table, get_operator

@functools.lru_cache(maxsize=None)
def table65(name: str):
    return build_moment_table(get_operator(name), 65)


@functools.lru_cache(maxsize=None)
def bounds(name: str, N_hi: int = 33):
    return stieltjes_lower_bounds(table65(name), range(2, N_hi + 1), 40)


def round_sig(x, figures: int) -> Decimal:
    """``x`` (Fraction, int, mpf or decimal string) rounded half-up to ``figures`` significant figures."""
    with localcontext() as ctx:
        ctx.prec = 80
        if isinstance(x, Fraction):
            d = Decimal(x.numerator) / Decimal(x.denominator)
        elif isinstance(x, mpmath.mpf):
            d = Decimal(mpmath.nstr(x, 70, strip_zeros=False))
        else:
            d = Decimal(str(x))
    return Context(prec=figures, rounding=ROUND_HALF_UP).plus(d)
