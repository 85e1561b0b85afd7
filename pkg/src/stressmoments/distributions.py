"""Distribution models matched against the exact moments.

* the shifted Gamma density (exact for the 2D CFT energy density and, empirically,
  for 4D ``phi^2``),
* the tail ansatz ``P(x) ~ c0 x**-2 exp(-a x**(1/3))`` calibrated on two
  successive high moments,
* a two-term model for the whole density,
* Chebyshev-type bounds on the tail probability,
* the Krein log-integral diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .kernel import (DEFAULT_DIGITS, ConvergenceError, InsufficientDepthError, Rational,
                     binomial, to_bigfloat)
from .moments import MomentTable


def _mpf(v) -> mpmath.mpf:
    if isinstance(v, (Fraction, int)):
        return to_bigfloat(v, mpmath.mp.dps)
    return mpmath.mpf(v)


# -- shifted Gamma --------------------------------------------------------------

@dataclass(frozen=True)
class ShiftedGammaParams:
    x0: object
    alpha: object
    beta: object

    def __post_init__(self):
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be positive")
        if self.x0 < 0:
            raise ValueError("x0 must be non-negative")

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in (self.x0, self.alpha, self.beta))

    @classmethod
    def from_central_charge(cls, c) -> "ShiftedGammaParams":
        """Parameters of the sampled energy density of a 2D CFT with central charge ``c``."""
        c = _mpf(c)
        return cls(c / (12 * mpmath.pi), c / 12, +mpmath.pi)


PHI2_GAMMA = ShiftedGammaParams(Fraction(1, 6), Fraction(1, 72), Fraction(1, 12))


def shifted_gamma_moments(params: ShiftedGammaParams, n_max: int) -> list:
    """``a_n = x0**n sum_k (-1)**(n-k) (beta x0)**-k C(n,k) (alpha)_k`` for ``n <= n_max``.

    Exact rationals when all parameters are rational, otherwise mpmath values.
    """
    if params.is_rational:
        x0, al, be = (Fraction(v) for v in (params.x0, params.alpha, params.beta))
        zero = Fraction(0)
    else:
        x0, al, be = (_mpf(v) for v in (params.x0, params.alpha, params.beta))
        zero = mpmath.mpf(0)
    # poch[k] = Gamma(alpha + k) / Gamma(alpha); (-x0)**(n-k) / beta**k == x0**n (-1)**(n-k) (beta x0)**-k
    poch = [1]
    for j in range(n_max):
        poch.append(poch[-1] * (al + j))
    out = []
    for n in range(n_max + 1):
        s = zero
        for k in range(n + 1):
            s += binomial(n, k) * (-x0) ** (n - k) * poch[k] / be ** k
        out.append(s)
    return out


def shifted_gamma_pdf(params: ShiftedGammaParams, x) -> mpmath.mpf:
    x0, al, be = (_mpf(v) for v in (params.x0, params.alpha, params.beta))
    t = _mpf(x) + x0
    if t <= 0:
        return mpmath.mpf(0)
    return be ** al * t ** (al - 1) * mpmath.exp(-be * t) / mpmath.gamma(al)


# -- tail ansatz ----------------------------------------------------------------

TAIL_B = -2
TAIL_C = Fraction(1, 3)


@dataclass(frozen=True)
class TailParams:
    """``P(x) ~ c0 x**b exp(-a x**c)`` with ``b = -2``, ``c = 1/3``."""

    c0: mpmath.mpf
    a: mpmath.mpf
    b: int = TAIL_B
    c: Fraction = TAIL_C

    def __post_init__(self):
        object.__setattr__(self, "c0", _mpf(self.c0))
        object.__setattr__(self, "a", _mpf(self.a))
        if not self.c0 > 0 or not self.a > 0:
            raise ValueError("c0 and a must be positive")

    @property
    def D(self) -> mpmath.mpf:
        """Growth rate in ``a_n ~ C D**n (3n-4)!``."""
        return self.a ** -3

    @property
    def C(self) -> mpmath.mpf:
        """Prefactor in ``a_n ~ C D**n (3n-4)!``; ``c0 = C D / 3``."""
        return 3 * self.c0 / self.D

    def pdf(self, x) -> mpmath.mpf:
        x = _mpf(x)
        return self.c0 * x ** self.b * mpmath.exp(-self.a * mpmath.cbrt(x))


def tail_fit(table: MomentTable, n_pair: tuple = (64, 65), digits: int = DEFAULT_DIGITS) -> TailParams:
    """Calibrate ``(c0, a)`` on two successive moments.

    ``a**3 = 3(n-1)(3n-2)(3n-1) a_n / a_{n+1}`` at ``n = n_pair[0]``, then
    ``c0`` from ``a_m = 3 c0 a**(3-3m) Gamma(3m-3)`` at ``m = n_pair[1]``.
    """
    n, m = n_pair
    if n < 2 or m < 2:
        raise ValueError("calibration indices must be at least 2")
    if table.n_max < max(n + 1, m):
        raise InsufficientDepthError(f"tail fit needs moments through n = {max(n + 1, m)}")
    with mpmath.workdps(digits):
        ratio = to_bigfloat(table.full[n] / table.full[n + 1], digits)
        a = mpmath.cbrt(3 * (n - 1) * (3 * n - 2) * (3 * n - 1) * ratio)
        am = to_bigfloat(table.full[m], digits)
        c0 = am * a ** (3 * m - 3) / (3 * mpmath.gamma(3 * m - 3))
        return TailParams(+c0, +a)


def tail_predicted_moment(tail: TailParams, n: int) -> mpmath.mpf:
    """``(c0/c) a**(-(n+b+1)/c) Gamma((n+b+1)/c)``, the ``n``-th moment of the pure tail on ``x > 0``."""
    if n < 2:
        raise ValueError("the tail moment only exists for n >= 2")
    c = _mpf(tail.c)
    s = (n + tail.b + 1) / c
    return tail.c0 / c * tail.a ** (-s) * mpmath.gamma(s)


def tail_validity_range(tail: TailParams, n_lo: int, n_hi: int) -> tuple:
    """Locations ``(3(n-2)/a)**3`` of the peak of ``x**n P(x)`` for ``n_lo`` and ``n_hi``."""
    if n_lo < 3:
        raise ValueError("n_lo must be at least 3")
    return tuple((3 * (n - 2) / tail.a) ** 3 for n in (n_lo, n_hi))


# -- upper incomplete Gamma ---------------------------------------------------

def upper_gamma(s, u, tol=None, max_terms: int = 100000) -> mpmath.mpf:
    """``Gamma(s, u)`` for ``u > 0`` by the modified Lentz continued fraction."""
    s, u = _mpf(s), _mpf(u)
    if u <= 0:
        raise ValueError("continued fraction needs u > 0")
    eps = tol if tol is not None else mpmath.mpf(10) ** (-mpmath.mp.dps)
    tiny = mpmath.mpf(10) ** (-2 * mpmath.mp.dps)
    b = u + 1 - s
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, max_terms):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        d = tiny if d == 0 else d
        c = b + an / c
        c = tiny if c == 0 else c
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < eps:
            return mpmath.exp(-u + s * mpmath.log(u)) * h
    raise ConvergenceError(f"incomplete Gamma continued fraction did not converge at s={s}, u={u}")


def fitted_tail_probability(tail: TailParams, lam) -> mpmath.mpf:
    """``int_lam^inf c0 x**-2 exp(-a x**(1/3)) dx = 3 c0 a**3 Gamma(-3, a lam**(1/3))``."""
    lam = _mpf(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return 3 * tail.c0 * tail.a ** 3 * upper_gamma(-3, tail.a * mpmath.cbrt(lam))


# -- model for the whole density ------------------------------------------------

@dataclass(frozen=True)
class FitParams:
    """``P(x) = c1 t**-alpha exp(-beta t**gamma) + c0 exp(-a t**(1/3)) / (alpha0 + t**2)``, ``t = x0 + x``."""

    c1: mpmath.mpf
    alpha: mpmath.mpf
    beta: mpmath.mpf
    gamma: mpmath.mpf
    alpha0: mpmath.mpf
    x0: mpmath.mpf
    c0: mpmath.mpf
    a: mpmath.mpf

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = _mpf(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, v)

    def tail(self) -> TailParams:
        return TailParams(self.c0, self.a)


RHO_EM_FIT = FitParams(c1="0.028", alpha="0.9999", beta="19.65", gamma="1.05", alpha0="610",
                       x0="0.0472", c0="0.95539211", a="0.9630614156")


def model_fit_pdf(fit: FitParams, x) -> mpmath.mpf:
    t = _mpf(x) + fit.x0
    if t <= 0:
        return mpmath.mpf(0)
    inner = fit.c1 * t ** (-fit.alpha) * mpmath.exp(-fit.beta * t ** fit.gamma)
    outer = fit.c0 * mpmath.exp(-fit.a * mpmath.cbrt(t)) / (fit.alpha0 + t * t)
    return inner + outer


def _inner_moment(fit: FitParams, n: int, cutoff) -> mpmath.mpf:
    # int_cutoff^inf (t - x0)**n c1 t**-alpha exp(-beta t**gamma) dt, term by term in t**k
    total = mpmath.mpf(0)
    for k in range(n + 1):
        e = (k - fit.alpha + 1) / fit.gamma
        if cutoff:
            g = mpmath.gammainc(e, fit.beta * cutoff ** fit.gamma)
        else:
            g = mpmath.gamma(e)
        total += binomial(n, k) * (-fit.x0) ** (n - k) * g / (fit.gamma * fit.beta ** e)
    return fit.c1 * total


def _outer_moment(fit: FitParams, n: int, tol) -> mpmath.mpf:
    # substitute t = s**3; the integrand then decays like exp(-a s) with its peak near s = 3n/a
    def f(s):
        t = s ** 3
        return 3 * s * s * (t - fit.x0) ** n * mpmath.exp(-fit.a * s) / (fit.alpha0 + t * t)

    peak = max(3 * n / fit.a, mpmath.mpf(2))
    nodes = [mpmath.mpf(0), mpmath.cbrt(fit.x0), mpmath.mpf(1), peak / 2, peak, 2 * peak, 4 * peak,
             mpmath.inf]
    value, err = mpmath.quad(f, sorted(set(nodes)), error=True, maxdegree=10)
    if err > tol * max(abs(value), mpmath.mpf(10) ** -(mpmath.mp.dps // 2)):
        raise ConvergenceError(f"fit moment n={n}: quadrature error {mpmath.nstr(err, 3)} above tolerance")
    return fit.c0 * value


def model_fit_moments(fit: FitParams, n_max: int, tol=mpmath.mpf("1e-10"),
                      inner_cutoff=0) -> list:
    """Moments ``0..n_max`` of the two-term model density over its support ``x >= -x0``.

    The first term is integrated in closed form through Gamma functions; the
    second by adaptive quadrature after ``t = s**3``. ``inner_cutoff`` starts
    the first term's integral at ``t = inner_cutoff`` instead of 0 (only useful
    for studying how sensitive the low moments are to the near-singular end).
    """
    tol = mpmath.mpf(tol)
    if not tol > 0:
        raise ValueError("tol must be positive")
    dps = max(30, int(-mpmath.log10(tol)) + 20)
    with mpmath.workdps(dps):
        cutoff = mpmath.mpf(inner_cutoff)
        out = [_inner_moment(fit, n, cutoff) + _outer_moment(fit, n, tol) for n in range(n_max + 1)]
    return [+m for m in out]


def fractional_errors(fitted: Sequence, exact: Sequence[Rational]) -> list:
    """``(fitted - exact) / exact`` per index, ``None`` where the exact moment vanishes."""
    out = []
    for f, e in zip(fitted, exact):
        out.append(None if e == 0 else f / to_bigfloat(e, mpmath.mp.dps) - 1)
    return out


# -- tail-probability bounds -----------------------------------------------------

def cdf_upper_bound(table: MomentTable, lam, return_index: bool = False):
    """``min(1, min_n (a_n + 1) / lam**n)``, valid for any distribution on ``[-x0, inf)`` with ``x0 < 1``."""
    lam = _mpf(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    best, arg = mpmath.mpf(1), None
    for n, an in enumerate(table.full):
        v = (to_bigfloat(an, mpmath.mp.dps) + 1) / lam ** n
        if v < best:
            best, arg = v, n
    return (best, arg) if return_index else best


def cdf_asymptotic_bound(tail: TailParams, lam) -> mpmath.mpf:
    """``sqrt(2 pi) C (D/lam)**(7/6) exp(-(lam/D)**(1/3))`` with ``D = a**-3`` and ``C = 3 c0 / D``."""
    lam = _mpf(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    D, C = tail.D, tail.C
    return mpmath.sqrt(2 * mpmath.pi) * C * (D / lam) ** (mpmath.mpf(7) / 6) * mpmath.exp(-mpmath.cbrt(lam / D))


# -- Krein diagnostic -----------------------------------------------------------

@dataclass
class KreinResult:
    value: mpmath.mpf | None
    divergent: bool
    upper_limit: mpmath.mpf


class _HardZero(Exception):
    pass


def krein_integral(pdf: Callable, x0, tol=mpmath.mpf("1e-8"), s_max=mpmath.mpf(2) ** 120,
                   logpdf: Callable | None = None) -> KreinResult:
    """``int_{-x0}^inf log p(x) / (sqrt(x + x0) (1 + x)) dx`` as a number or a divergence flag.

    With ``x = s**2 - x0`` the integrand becomes ``2 log p / (1 - x0 + s**2)``,
    free of the endpoint square root. The range in ``s`` is covered by
    doubling intervals; the integral is declared finite once the partial
    contributions decay geometrically with a remainder estimate below ``tol``,
    and divergent if they stop decaying or ``p`` vanishes at a sample point.
    Supply ``logpdf`` when ``p`` itself underflows far in the tail.
    """
    x0 = _mpf(x0)
    if not 0 <= x0 < 1:
        raise ValueError("the Krein weight needs 0 <= x0 < 1")
    tol = mpmath.mpf(tol)

    def log_p(x):
        if logpdf is not None:
            return mpmath.mpf(logpdf(x))
        v = mpmath.mpf(pdf(x))
        if v < 0:
            raise ValueError(f"pdf is negative at x = {x}")
        if v == 0:
            raise _HardZero
        return mpmath.log(v)

    def integrand(s):
        return 2 * log_p(s * s - x0) / (1 - x0 + s * s)

    # extra working digits keep x + x0 = s**2 resolvable down to tiny s; below the
    # cutoff the skipped sliver contributes O(s log s) for any integrable endpoint singularity
    work = mpmath.mp.dps + 15
    with mpmath.workdps(work):
        total = mpmath.mpf(0)
        prev = None
        growing = 0
        lo = mpmath.sqrt(x0) * mpmath.mpf(10) ** (2 - work // 2) if x0 > 0 else mpmath.mpf(0)
        hi = mpmath.mpf(1)
        try:
            while hi <= s_max:
                piece = mpmath.quad(integrand, [lo, hi])
                total += piece
                if prev is not None and prev != 0:
                    r = abs(piece / prev)
                    if r < 1:
                        growing = 0
                        remainder = abs(piece) * r / (1 - r)
                        if remainder < tol * max(1, abs(total)) and hi > 4:
                            return KreinResult(+total, False, hi)
                    else:
                        growing += 1
                        if growing >= 4:
                            return KreinResult(None, True, hi)
                prev = piece
                lo, hi = hi, 2 * hi
        except _HardZero:
            return KreinResult(None, True, hi)
    # partial integrals never settled below tol
    return KreinResult(None, True, lo)


__all__ = [
    "ShiftedGammaParams", "PHI2_GAMMA", "shifted_gamma_moments", "shifted_gamma_pdf",
    "TailParams", "tail_fit", "tail_predicted_moment", "tail_validity_range",
    "upper_gamma", "fitted_tail_probability", "FitParams", "RHO_EM_FIT", "model_fit_pdf",
    "model_fit_moments", "fractional_errors", "cdf_upper_bound", "cdf_asymptotic_bound",
    "KreinResult", "krein_integral",
]
