from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from stressmoments.kernel import (FormalSeries, binomial, check_digits, count_partitions_by_parity,
                                  factorial, partitions, partitions_even_parts, series_exp,
                                  series_log, to_bigfloat)


def test_factorial_and_binomial():
    assert factorial(0) == 1 and factorial(10) == 3628800
    assert binomial(5, 7) == 0 and binomial(6, 3) == 20
    with pytest.raises(ValueError):
        factorial(-1)
    with pytest.raises(ValueError):
        binomial(3, -1)


def test_to_bigfloat_is_correctly_rounded():
    with mpmath.workdps(50):
        assert to_bigfloat(Fraction(1, 3), 50) == mpmath.mpf(1) / 3
    assert check_digits(20) == 20
    with pytest.raises(ValueError):
        check_digits(10)


def test_even_part_partitions_of_four():
    assert partitions_even_parts(4) == [(3, 1), (2, 2), (1, 1, 1, 1)]
    with pytest.raises(ValueError):
        partitions_even_parts(1)


@given(st.integers(min_value=1, max_value=22))
def test_partition_counts_match_sympy(n):
    parts = list(partitions(n))
    assert len(parts) == sympy.partition(n)
    assert len(set(parts)) == len(parts)
    assert all(sum(p) == n and list(p) == sorted(p, reverse=True) for p in parts)
    even = sum(1 for p in parts if len(p) % 2 == 0)
    assert count_partitions_by_parity(n) == (even, len(parts) - even)


def test_exp_of_gaussian_cumulants():
    # a single second cumulant gives the Gaussian moments (n-1)!!
    moments = series_exp([0, 0, 1, 0, 0, 0, 0, 0, 0])
    assert list(moments.coefficients) == [1, 0, 1, 0, 3, 0, 15, 0, 105]


def test_exp_of_poisson_cumulants():
    # all cumulants 1 give the Bell numbers
    assert list(series_exp([0] + [1] * 8).coefficients) == [sympy.bell(n) for n in range(9)]


@settings(max_examples=60)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=1, max_size=10))
def test_log_inverts_exp(tail):
    cumulants = [Fraction(0)] + tail
    assert list(series_log(series_exp(cumulants)).coefficients) == cumulants


def test_series_errors():
    with pytest.raises(ValueError):
        series_exp([1, 2])
    with pytest.raises(ValueError):
        series_log([2, 1])
    assert FormalSeries.zero(3).truncation_order == 3
