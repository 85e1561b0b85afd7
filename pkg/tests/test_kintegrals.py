from fractions import Fraction
from math import comb, factorial

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from stressmoments.kernel import to_bigfloat
from stressmoments.kintegrals import (k_lower_bound, k_numeric_oracle, k_table, k_upper_bound,
                                      k_value)


def _k_by_nested_sums(p, n, r):
    # the fully expanded nested-sum formula, independent of the table recurrence
    unit = Fraction(factorial(p), 2 ** (p + 1))

    def inner(level, r_above):
        if level == 0:
            return 1
        return sum(comb(p + rk, p) * inner(level - 1, rk) for rk in range(p + r_above + 2))

    return unit ** n * comb(p + r, p) * inner(n - 1, r)


def test_first_values():
    assert k_value(1, 1) == Fraction(1, 4)
    assert k_value(3, 1) == Fraction(3, 8)
    assert k_value(1, 2) == Fraction(1, 4) ** 2 * (1 + 2 + 3)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([1, 3, 5]), st.integers(1, 5), st.integers(0, 4))
def test_table_matches_nested_sums(p, n, r):
    assert k_value(p, n, r) == _k_by_nested_sums(p, n, r)


@pytest.mark.parametrize("p,n,r", [(1, 1, 0), (3, 1, 2), (1, 2, 0), (3, 2, 1), (1, 2, 3)])
def test_table_matches_quadrature(p, n, r):
    with mpmath.workdps(25):
        assert abs(k_numeric_oracle(p, n, r, 20) / to_bigfloat(k_value(p, n, r), 25) - 1) < mpmath.mpf("1e-15")


@pytest.mark.parametrize("p", [1, 3])
def test_triple_integral_quadrature(p):
    assert abs(k_numeric_oracle(p, 3) / to_bigfloat(k_value(p, 3)) - 1) < mpmath.mpf("1e-9")


def test_table_depth_and_errors():
    t = k_table(3, 6)
    assert t.k0(6) == k_value(3, 6)
    assert t.prefix_sum(2, 3) == sum(t(2, r) for r in range(4))
    with pytest.raises(ValueError):
        t(7)
    with pytest.raises(ValueError):
        k_table(2, 5)
    with pytest.raises(ValueError):
        k_numeric_oracle(1, 4)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 3, 5]), st.integers(1, 12), st.integers(0, 6))
def test_two_sided_bounds(p, n, r):
    assert k_lower_bound(p, n, r) <= k_value(p, n, r) <= k_upper_bound(p, n, r)


def test_lower_bound_is_exact_at_n_one():
    for p in (1, 3, 5):
        for r in range(4):
            assert k_lower_bound(p, 1, r) == k_value(p, 1, r)
