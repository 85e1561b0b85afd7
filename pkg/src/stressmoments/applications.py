"""Order-of-magnitude physics from the tail: black-hole nucleation and Boltzmann brains.

Units are natural (hbar = c = 1) with lengths in cm. The default conversions
are deliberately rough, so as to match the usual back-of-envelope numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath

from .distributions import TailParams, upper_gamma


@dataclass(frozen=True)
class PhysicalConstants:
    planck_length_cm: mpmath.mpf = mpmath.mpf("1e-33")
    planck_mass_g: mpmath.mpf = mpmath.mpf("2.18e-5")
    cm_per_second: mpmath.mpf = mpmath.mpf("3e10")
    inverse_cm_per_kg: mpmath.mpf = mpmath.mpf("1e41")

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = mpmath.mpf(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, v)


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class NucleationQuery:
    """A spacetime region plus either a black-hole mass (in Planck masses) or an expected count.

    ``planck_four_volume`` overrides the ``V T / l_p**4`` computed from
    ``volume_cm3`` and ``time_s``.
    """

    volume_cm3: mpmath.mpf = mpmath.mpf(1)
    time_s: mpmath.mpf = mpmath.mpf(1)
    mass_in_planck_units: Optional[mpmath.mpf] = None
    expected_count: Optional[mpmath.mpf] = None
    planck_four_volume: Optional[mpmath.mpf] = None

    def __post_init__(self):
        if (self.mass_in_planck_units is None) == (self.expected_count is None):
            raise ValueError("give exactly one of mass_in_planck_units and expected_count")

    def four_volume(self, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> mpmath.mpf:
        if self.planck_four_volume is not None:
            return mpmath.mpf(self.planck_four_volume)
        v, t = mpmath.mpf(self.volume_cm3), mpmath.mpf(self.time_s)
        if v <= 0 or t <= 0:
            raise ValueError("volume and time must be positive")
        return v * t * constants.cm_per_second / constants.planck_length_cm ** 4


def nucleation_probability(tail: TailParams, x, mode: str = "exact", upper_factor=2) -> mpmath.mpf:
    """Tail probability of ``[x, upper_factor * x]``.

    ``exact``: ``3 c0 a**3 (Gamma(-3, u1) - Gamma(-3, u2))`` with ``u1 = a x**(1/3)``
    and ``u2 = upper_factor**(1/3) u1``. ``asymptotic``: the large-``x`` form
    ``(3 c0 / a) x**(-4/3) exp(-a x**(1/3))``.
    """
    x = mpmath.mpf(x)
    if x <= 0:
        raise ValueError("x must be positive")
    u1 = tail.a * mpmath.cbrt(x)
    if mode == "exact":
        u2 = mpmath.cbrt(mpmath.mpf(upper_factor)) * u1
        return 3 * tail.c0 * tail.a ** 3 * (upper_gamma(-3, u1) - upper_gamma(-3, u2))
    if mode == "asymptotic":
        return 3 * tail.c0 / tail.a * x ** (-mpmath.mpf(4) / 3) * mpmath.exp(-u1)
    raise ValueError(f"unknown mode {mode!r}")


def a0_constant(tail: TailParams) -> mpmath.mpf:
    """``(16 pi**2)**(1/3) a``, the rate in ``exp(-a0 (M/m_p)**(2/3))``."""
    return mpmath.cbrt(16 * mpmath.pi ** 2) * tail.a


def _count(four_volume, mu, tail: TailParams) -> mpmath.mpf:
    k = 16 * mpmath.pi ** 2
    return (3 * tail.c0 / tail.a * k ** (-mpmath.mpf(4) / 3) * four_volume
            * mu ** (-mpmath.mpf(20) / 3) * mpmath.exp(-a0_constant(tail) * mu ** (mpmath.mpf(2) / 3)))


def black_hole_count(query: NucleationQuery, tail: TailParams,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS) -> mpmath.mpf:
    """Mean number of black holes of mass ``M`` nucleated in the region, one cell per ``(M l_p**2)**4``."""
    if query.mass_in_planck_units is None:
        raise ValueError("query has no mass; use black_hole_mass_for_count")
    mu = mpmath.mpf(query.mass_in_planck_units)
    if mu <= 0:
        raise ValueError("mass must be positive")
    return _count(query.four_volume(constants), mu, tail)


def black_hole_mass_for_count(query: NucleationQuery, tail: TailParams,
                              constants: PhysicalConstants = DEFAULT_CONSTANTS,
                              bracket=(1, 10 ** 6)) -> mpmath.mpf:
    """Mass ``M / m_p`` at which the expected count equals ``query.expected_count``."""
    if query.expected_count is None:
        raise ValueError("query has no expected count")
    target = mpmath.mpf(query.expected_count)
    if target <= 0:
        raise ValueError("expected count must be positive")
    vol = query.four_volume(constants)
    log_target = mpmath.log(target)

    def g(mu):
        return mpmath.log(_count(vol, mu, tail)) - log_target

    lo, hi = mpmath.mpf(bracket[0]), mpmath.mpf(bracket[1])
    if g(lo) < 0 or g(hi) > 0:
        raise ValueError(f"no mass in [{bracket[0]}, {bracket[1]}] Planck masses gives that count")
    # the count is strictly decreasing in mu; bisect in log mu
    for _ in range(4 * mpmath.mp.prec):
        mid = mpmath.sqrt(lo * hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= hi * mpmath.eps * 4:
            break
    return (lo + hi) / 2


def boltzmann_brain_exponent(mass_kg, size_cm, time_s,
                             constants: PhysicalConstants = DEFAULT_CONSTANTS) -> mpmath.mpf:
    """``E = tau**(4/3) M**(1/3) / l`` with ``P ~ exp(-E)``; prefactor dropped and ``a`` set to 1."""
    m, ell, t = (mpmath.mpf(v) for v in (mass_kg, size_cm, time_s))
    if m <= 0 or ell <= 0 or t <= 0:
        raise ValueError("mass, size and time must be positive")
    tau = t * constants.cm_per_second
    M = m * constants.inverse_cm_per_kg
    return tau ** (mpmath.mpf(4) / 3) * mpmath.cbrt(M) / ell


__all__ = [
    "PhysicalConstants", "DEFAULT_CONSTANTS", "NucleationQuery", "nucleation_probability",
    "a0_constant", "black_hole_count", "black_hole_mass_for_count", "boltzmann_brain_exponent",
]
