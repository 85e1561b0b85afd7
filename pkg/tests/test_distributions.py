from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

import reference_values as ref
from helpers import round_sig
from stressmoments.distributions import (PHI2_GAMMA, RHO_EM_FIT, FitParams, ShiftedGammaParams,
                                         TailParams, cdf_asymptotic_bound, cdf_upper_bound,
                                         fitted_tail_probability, fractional_errors, krein_integral,
                                         model_fit_moments, model_fit_pdf, shifted_gamma_moments,
                                         shifted_gamma_pdf, tail_fit, tail_predicted_moment,
                                         tail_validity_range, upper_gamma)
from stressmoments.kernel import ConvergenceError, to_bigfloat


def test_gamma_moments_first_values():
    a = shifted_gamma_moments(PHI2_GAMMA, 4)
    assert a == [1, 0, 2, 48, 1740]
    assert all(isinstance(x, Fraction) for x in a)


@pytest.mark.parametrize("c", ["1", "2.5"])
def test_gamma_moments_against_quadrature(c):
    with mpmath.workdps(30):
        params = ShiftedGammaParams.from_central_charge(mpmath.mpf(c))
        x0, al, be = params.x0, params.alpha, params.beta
        exact = shifted_gamma_moments(params, 5)
        # u = (x + x0)**alpha removes the endpoint singularity of the density
        norm = be ** al / (al * mpmath.gamma(al))
        for n in range(6):
            f = lambda u: norm * (u ** (1 / al) - x0) ** n * mpmath.exp(-be * u ** (1 / al))
            num = mpmath.quad(f, [0, mpmath.mpf("0.5"), 1, mpmath.inf])
            assert abs(num - exact[n]) < mpmath.mpf("1e-15") * max(1, abs(exact[n]))


def test_gamma_param_validation():
    with pytest.raises(ValueError):
        ShiftedGammaParams(Fraction(1, 6), 0, 1)
    with pytest.raises(ValueError):
        ShiftedGammaParams(-1, 1, 1)
    assert shifted_gamma_pdf(PHI2_GAMMA, -1) == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([-3, -1, Fraction(1, 2), 2]), st.floats(min_value=0.5, max_value=300))
def test_upper_gamma_against_mpmath(s, u):
    with mpmath.workdps(30):
        s_m = to_bigfloat(Fraction(s))
        ours = upper_gamma(s_m, u)
        oracle = mpmath.gammainc(s_m, u)
        assert abs(ours / oracle - 1) < mpmath.mpf("1e-20")


def test_upper_gamma_errors():
    with pytest.raises(ValueError):
        upper_gamma(-3, 0)
    with pytest.raises(ConvergenceError):
        upper_gamma(-3, mpmath.mpf("1e-3"), max_terms=3)


def test_tail_parameters(tables):
    for name, (c0, a) in ref.TAIL.items():
        t = tail_fit(tables(name))
        assert round_sig(t.c0, 5) == round_sig(c0, 5)
        assert round_sig(t.a, 5) == round_sig(a, 5)


def test_tail_prefactor_identities():
    t = TailParams("0.95539211", "0.9630614156")
    assert abs(t.D - t.a ** -3) < 1e-30
    assert abs(t.C * t.D / 3 - t.c0) < 1e-25
    with pytest.raises(ValueError):
        TailParams(0, 1)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_tail_moment_against_quadrature(n):
    t = TailParams("0.95539211", "0.9630614156")
    with mpmath.workdps(30):
        peak = (3 * (n - 2) / t.a) ** 3 if n > 2 else mpmath.mpf(1)
        num = mpmath.quad(lambda x: x ** n * t.pdf(x), [0, 1, peak / 4, peak, 4 * peak, 16 * peak, mpmath.inf])
        assert abs(num / tail_predicted_moment(t, n) - 1) < mpmath.mpf("1e-12")
    with pytest.raises(ValueError):
        tail_predicted_moment(t, 1)


def test_tail_predicts_high_moments(tables):
    table = tables("rhoEM")
    t = tail_fit(table)
    assert abs(tail_predicted_moment(t, 20) / to_bigfloat(table.full[20]) - 1) < 0.01
    assert abs(tail_predicted_moment(t, 4) / to_bigfloat(table.full[4]) - 1) < 0.16


def test_validity_range():
    lo, hi = tail_validity_range(TailParams(1, 1), 4, 65)
    assert (lo, hi) == (216, 6751269)
    with pytest.raises(ValueError):
        tail_validity_range(TailParams(1, 1), 2, 65)


def test_fitted_tail_probability_against_quadrature():
    t = RHO_EM_FIT.tail()
    with mpmath.workdps(30):
        lam = mpmath.mpf(10) ** 4
        num = mpmath.quad(t.pdf, [lam, 10 * lam, 1000 * lam, mpmath.inf])
        assert abs(fitted_tail_probability(t, lam) / num - 1) < mpmath.mpf("1e-15")


def test_model_fit_reproduces_published_errors_from_n_four(tables):
    fitted = model_fit_moments(RHO_EM_FIT, 21)
    errors = fractional_errors(fitted, tables("rhoEM").full[:22])
    assert errors[1] is None
    for n in range(4, 22):
        assert round_sig(errors[n], 3) == round_sig(ref.FIT_ERRORS[n], 3), n


def test_model_fit_moment_against_direct_quadrature():
    with mpmath.workdps(30):
        fit = RHO_EM_FIT
        n = 5
        direct = mpmath.quad(lambda x: x ** n * model_fit_pdf(fit, x),
                             [-fit.x0, 0, 1, 100, 10 ** 4, 10 ** 6, mpmath.inf])
        assert abs(model_fit_moments(fit, n)[n] / direct - 1) < mpmath.mpf("1e-8")


def test_model_fit_inner_cutoff_changes_only_low_moments():
    plain = model_fit_moments(RHO_EM_FIT, 6)
    cut = model_fit_moments(RHO_EM_FIT, 6, inner_cutoff=mpmath.mpf("1e-17"))
    assert abs(cut[0] - plain[0]) > 100
    assert abs(cut[6] / plain[6] - 1) < mpmath.mpf("1e-8")


def test_fit_params_validation():
    with pytest.raises(ValueError):
        FitParams(c1=0, alpha=1, beta=1, gamma=1, alpha0=1, x0=1, c0=1, a=1)
    with pytest.raises(ValueError):
        model_fit_moments(RHO_EM_FIT, 2, tol=0)


def test_cdf_bounds(tables):
    table = tables("rhoEM")
    assert cdf_upper_bound(table, mpmath.mpf("0.5")) == 1
    values = [cdf_upper_bound(table, mpmath.mpf(10) ** k) for k in range(0, 9)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    b, n = cdf_upper_bound(table, mpmath.mpf("1e6"), return_index=True)
    assert n == 33
    tail = tail_fit(table)
    asym = cdf_asymptotic_bound(tail, mpmath.mpf("1e6"))
    assert 1 / mpmath.mpf(3) < b / asym < 3
    # the true tail probability sits below the moment bound
    assert fitted_tail_probability(tail, mpmath.mpf("1e6")) < b
    with pytest.raises(ValueError):
        cdf_upper_bound(table, 0)


def _krein_oracle(pdf, x0):
    # direct x-space quadrature at raised precision
    with mpmath.workdps(40):
        f = lambda x: mpmath.log(pdf(x)) / (mpmath.sqrt(x + x0) * (1 + x))
        return mpmath.quad(f, [-x0, 0, 1, 100, 10 ** 4, 10 ** 8, 10 ** 12, 10 ** 16, 10 ** 24, mpmath.inf])


def test_krein_closed_form():
    # int_0^inf log(1+x)/(sqrt(x)(1+x)) dx = 2 pi log 2
    result = krein_integral(lambda x: (1 + x) ** -3, 0, tol=mpmath.mpf("1e-12"))
    assert abs(result.value + 6 * mpmath.pi * mpmath.log(2)) < mpmath.mpf("1e-9")


def test_krein_finite_for_power_law():
    pdf = lambda x: 2 / (mpmath.mpf(3) / 2 + x) ** 3
    x0 = mpmath.mpf("0.25")
    result = krein_integral(pdf, x0, tol=mpmath.mpf("1e-12"))
    assert not result.divergent
    assert abs(result.value - _krein_oracle(pdf, x0)) < mpmath.mpf("1e-8")


def test_krein_finite_for_fit_density():
    pdf = lambda x: model_fit_pdf(RHO_EM_FIT, x)
    result = krein_integral(pdf, RHO_EM_FIT.x0)
    assert not result.divergent
    assert abs(result.value - _krein_oracle(pdf, RHO_EM_FIT.x0)) < mpmath.mpf("1e-5") * abs(result.value)


def test_krein_divergent_cases():
    assert krein_integral(lambda x: shifted_gamma_pdf(PHI2_GAMMA, x), PHI2_GAMMA.x0).divergent
    hard_zero = lambda x: mpmath.mpf(0) if 1 <= x <= 2 else mpmath.exp(-x) / 2
    assert krein_integral(hard_zero, 0).divergent
    with pytest.raises(ValueError):
        krein_integral(lambda x: 1, 1)
