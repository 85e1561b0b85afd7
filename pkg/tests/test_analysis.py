from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from stressmoments.analysis import (StieltjesMatrix, accelerate, accelerate_chain, bound_sequence,
                                    extrapolate_fit, leading_minors, stieltjes_lower_bound,
                                    stieltjes_lower_bounds)
from stressmoments.distributions import ShiftedGammaParams, shifted_gamma_moments
from stressmoments.kernel import InsufficientDepthError, to_bigfloat
from stressmoments.moments import build_moment_table, get_operator


def test_y2_closed_form():
    with mpmath.workdps(40):
        y = stieltjes_lower_bound(build_moment_table(get_operator("phi2"), 4), 2, 40)
        assert abs(y - (mpmath.sqrt(146) - 12)) < mpmath.mpf("1e-38")


def test_determinant_matches_sympy():
    a = build_moment_table(get_operator("phi2"), 9).full
    y = sympy.Symbol("y")
    N = 4
    M = sympy.Matrix(N, N, lambda i, j: sympy.Rational(a[i + j + 1]) + y * sympy.Rational(a[i + j]))
    expected = sympy.Poly(M.det(), y).all_coeffs()[::-1]
    got = StieltjesMatrix.from_moments(a, N).determinant()
    assert [sympy.Rational(c) for c in got] == expected


@pytest.mark.parametrize("N", [3, 6])
def test_bound_is_the_feasibility_edge(N):
    # all leading minors are positive just above y_N and not all just below
    a = build_moment_table(get_operator("phidot2"), 2 * N).full
    y = stieltjes_lower_bound(a, N, 30)
    eps = Fraction(1, 10 ** 20)
    yq = Fraction(mpmath.nstr(y, 30, strip_zeros=False))
    assert all(m > 0 for m in leading_minors(a, N, yq + eps))
    assert any(m <= 0 for m in leading_minors(a, N, yq - eps))


def test_bounds_increase_towards_support_edge():
    # shifted Gamma with support [-1/6, inf): y_N increases towards 1/6
    a = shifted_gamma_moments(ShiftedGammaParams(Fraction(1, 6), Fraction(1, 72), Fraction(1, 12)), 21)
    ys = stieltjes_lower_bounds(a, range(2, 11), 25)
    vals = [ys[N] for N in range(2, 11)]
    assert all(b > c for b, c in zip(vals[1:], vals))
    assert vals[-1] < mpmath.mpf(1) / 6


def test_two_point_distribution_is_found_exactly():
    # moments of (delta_{-1/2} + delta_{3}) / 2: support edge -1/2 is reached at N = 2
    a = [(Fraction(-1, 2) ** n + Fraction(3) ** n) / 2 for n in range(6)]
    ys = stieltjes_lower_bounds(a, [2], 30)
    assert abs(ys[2] - mpmath.mpf("0.5")) < mpmath.mpf("1e-25")


def test_errors():
    a = build_moment_table(get_operator("phi2"), 6).full
    with pytest.raises(InsufficientDepthError):
        stieltjes_lower_bound(a, 4)
    with pytest.raises(ValueError):
        stieltjes_lower_bounds(a, [1])
    with pytest.raises(ValueError):
        stieltjes_lower_bound(a, 2, digits=5)
    with pytest.raises(InsufficientDepthError):
        StieltjesMatrix.from_moments(a, 4)


def test_bound_sequence_csv():
    seq = bound_sequence(build_moment_table(get_operator("phi2"), 7), [2, 3], 20)
    lines = seq.to_csv().splitlines()
    assert lines[0] == "N,y_N" and lines[1].startswith("2,0.083045973594572")


@settings(max_examples=40)
@given(st.fractions(min_value=-2, max_value=2, max_denominator=50),
       st.fractions(min_value=-2, max_value=2, max_denominator=50))
def test_first_order_acceleration_removes_inverse_n(c, d):
    seq = {N: to_bigfloat(c) + to_bigfloat(d) / N for N in range(5, 15)}
    for _, v in accelerate(seq, 1):
        assert abs(v - to_bigfloat(c)) < mpmath.mpf("1e-12")


def test_chain_composes():
    seq = {N: 1 + mpmath.mpf(1) / N + mpmath.mpf(1) / N ** 2 for N in range(5, 20)}
    assert accelerate_chain(seq, [1, 2]) == accelerate(accelerate(seq, 1), 2)
    with pytest.raises(ValueError):
        accelerate({1: 1, 3: 2}, 1)
    with pytest.raises(ValueError):
        accelerate(seq, 0)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=30), min_size=3, max_size=3))
def test_extrapolation_recovers_exact_model(coefs):
    exps = (0, Fraction(1, 2), 1)
    seq = {N: sum(to_bigfloat(c) * mpmath.mpf(N) ** -to_bigfloat(e) for c, e in zip(coefs, exps))
           for N in range(10, 30)}
    fit = extrapolate_fit(seq, exps, (12, 28))
    assert abs(fit.y_infinity - to_bigfloat(coefs[0])) < mpmath.mpf("1e-12")
    assert fit.max_residual < mpmath.mpf("1e-12")


def test_extrapolation_errors():
    seq = {N: mpmath.mpf(1) for N in range(10, 14)}
    with pytest.raises(ValueError):
        extrapolate_fit(seq, (1, 2), (10, 13))
    with pytest.raises(ValueError):
        extrapolate_fit(seq, (0, 1, 2, 3, 4), (10, 13))
