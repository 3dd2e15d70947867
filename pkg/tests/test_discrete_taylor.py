import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from supershift_lab.casebook import entire_target
from supershift_lab.discrete_taylor import (
    UPSILON,
    NumericalTaylorSeries,
    bernstein_form,
    extrapolation_via_form,
    forward_differences,
    monomial_expansion,
    numerical_taylor,
    radius_diagnostic,
    representation_residual,
    rolle_quotient,
)
from supershift_lab.errors import DomainError
from supershift_lab.precision import PrecisionPolicy
from supershift_lab.sampling import power_eps, regular_frequencies
from supershift_lab.supershift import Interval, TargetFunction, extrapolate
from supershift_lab.trigpoly import bernstein_coefficients

P = PrecisionPolicy(256)
small = st.fractions(min_value=-2, max_value=2, max_denominator=16)
eps_fracs = st.fractions(min_value=0, max_value=Fraction(3, 4), max_denominator=8)


def poly_target(coeffs):
    def sampler(t, ctx):
        out = 0
        for c in reversed(coeffs):
            out = out * t + (Fraction(c) if ctx is None else ctx.mpf(c))
        return out

    return TargetFunction(sampler, exact_capable=True, name="poly")


def test_upsilon_round_trip():
    for a in (Fraction(-7, 3), Fraction(0), Fraction(5, 2)):
        assert UPSILON.forward(UPSILON.inverse(a)) == a
    assert UPSILON.inverse_interval(Interval(-1, 3)) == Interval(0, 2)


def test_forward_difference_examples():
    const = forward_differences(poly_target([5]), 0, 6, exact=True)
    assert const.leading == [5, 0, 0, 0, 0, 0, 0]
    lin = forward_differences(poly_target([0, 1]), 0, 4, exact=True)
    assert lin.leading == [0, Fraction(1, 4), 0, 0, 0]
    sq = forward_differences(poly_target([0, 0, 1]), 0, 2, exact=True)
    assert sq.leading == [0, Fraction(1, 4), Fraction(1, 2)]


def test_forward_difference_recurrence_holds_exactly():
    table = forward_differences(entire_target("cos"), Fraction(1, 3), 10, Fraction(1, 5), exact=True)
    assert table.recurrence_residual() == 0


def test_forward_differences_float_match_exact_binomial_sums():
    Psi = UPSILON.compose(entire_target("exp"))
    exact = forward_differences(Psi, Fraction(1, 4), 12, Fraction(1, 7), exact=True).leading
    flt = forward_differences(Psi, Fraction(1, 4), 12, Fraction(1, 7), policy=P).leading
    for e, f in zip(exact, flt):
        assert abs(P.lift(e) - f) < mpmath.ldexp(1, -230)


def test_forward_differences_domain_error():
    Psi = TargetFunction(lambda t, ctx: ctx.log(t), Interval(0, 1))
    with pytest.raises(DomainError):
        forward_differences(Psi, Fraction(1, 2), 4, policy=P)


def test_bernstein_form_examples():
    assert bernstein_form(poly_target([1]), 0, 5, exact=True).coefficients == (1, 0, 0, 0, 0, 0)
    assert bernstein_form(poly_target([0, 1]), 0, 5, exact=True).coefficients == (0, 1, 0, 0, 0, 0)
    Psi = UPSILON.compose(entire_target("sinh"))
    form = bernstein_form(Psi, Fraction(1, 3), 7, Fraction(1, 9), policy=P)
    assert form.coefficients[0] == Psi(Fraction(1, 3), P)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), small, eps_fracs, st.sampled_from(["poly5", "abs", "square", "cos"]))
def test_representation_identity_exact(N, b, eps, name):
    Psi = UPSILON.compose(entire_target(name))
    form = bernstein_form(Psi, b, N, eps, exact=True)
    assert representation_residual(form) == 0
    assert list(form.coefficients) == monomial_expansion(form.samples, N)
    for X in (Fraction(0), Fraction(1, 3), Fraction(1), Fraction(-2)):
        assert form(X) == form.direct(X)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), small, eps_fracs, st.fractions(0, 1, max_denominator=16))
def test_monomial_and_direct_forms_agree_in_float_mode(N, b, eps, X):
    form = bernstein_form(UPSILON.compose(entire_target("exp_i")), b, N, eps, policy=P)
    X = P.lift(X)
    assert abs(form(X) - form.direct(X)) <= P.half_tolerance * max(1, abs(form.direct(X)))


def test_exp_coefficients_match_closed_form():
    # Delta_h^k e^{2t-1} at 0 is e^{-1} (e^{2h} - 1)^k
    Psi = UPSILON.compose(entire_target("exp"))
    for N in (3, 8, 13):
        form = bernstein_form(Psi, 0, N, policy=P)
        h = P.lift(1) / N
        for k, c in enumerate(form.coefficients):
            ref = math.comb(N, k) * P.ctx.exp(-1) * (P.ctx.exp(2 * h) - 1) ** k
            assert abs(c - ref) <= mpmath.ldexp(1, -200) * max(1, abs(ref))


@pytest.mark.parametrize("name, b", [("exp", Fraction(-1, 2)), ("exp", Fraction(1, 3)), ("poly5", Fraction(0)),
                                     ("cosh", Fraction(1, 2))])
@pytest.mark.parametrize("kappa", [1, 2, 3, 4])
def test_rolle_sandwich(name, b, kappa):
    # all derivatives of these targets are increasing on windows with t >= b
    psi = entire_target(name)
    Psi = UPSILON.compose(psi)
    N, eps = 12, Fraction(1, 6)
    q = rolle_quotient(Psi, b, kappa, N, eps, policy=P)
    window_end = P.lift(b) + kappa * (1 - P.lift(eps)) / N

    def deriv(t):
        return P.ctx.diff(lambda s: psi(2 * s - 1, P), t, kappa) / math.factorial(kappa)

    assert deriv(P.lift(b)) <= q <= deriv(window_end)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 24), st.fractions(-3, 3, max_denominator=8), st.fractions(-2, 2, max_denominator=8),
       eps_fracs, st.sampled_from(["cos", "exp", "sinh"]))
def test_domain_transport_matches_extrapolation(N, a, ap, eps, name):
    psi = entire_target(name)
    row = regular_frequencies(N, eps, policy=P)
    direct = extrapolate(psi, a, ap, row, bernstein_coefficients(N, a, policy=P), policy=P)
    via = extrapolation_via_form(psi, a, ap, N, eps, policy=P)
    assert abs(direct - via) <= P.half_tolerance * max(1, abs(direct))


def test_domain_transport_exact():
    psi = entire_target("poly5")
    N, a, ap, eps = 9, Fraction(5, 2), Fraction(-1, 3), Fraction(1, 9)
    row = regular_frequencies(N, eps, exact=True)
    direct = extrapolate(psi, a, ap, row, bernstein_coefficients(N, a, exact=True), exact=True)
    assert extrapolation_via_form(psi, a, ap, N, eps, exact=True) == direct


def test_numerical_taylor_examples():
    s = numerical_taylor(poly_target([3]), 0, 2, 6, exact=True)
    assert s.coefficients == (3, 0, 0, 0, 0, 0, 0)
    Ns = [4 * k for k in range(1, 6)]
    lin = numerical_taylor(poly_target([0, 1]), Fraction(1, 5), 4, 5, power_eps(Fraction(1, 2), Ns), exact=True)
    assert lin.coefficients[:2] == (Fraction(1, 5), 1 - Fraction(1, 8))
    assert lin.coefficients[2:] == (0, 0, 0, 0)


def test_numerical_taylor_exp_product_relation():
    # a_{N,k} = binom(N,k) Delta^k tends to prod_{j<k}(1 - j/N) times the true coefficient
    M, kmax = 4, 12
    s = numerical_taylor(UPSILON.compose(entire_target("exp")), 0, M, kmax, policy=P)
    for k in range(1, kmax + 1):
        N = M * k
        true = P.ctx.exp(-1) * P.lift(2) ** k / math.factorial(k)
        damp = math.prod(1 - j / N for j in range(k))
        ratio = s.coefficients[k] / (true * damp)
        assert abs(ratio - 1) <= k * (k + 1) / N + 1e-12


def test_numerical_taylor_exact_matches_float():
    Psi = UPSILON.compose(entire_target("poly5"))
    e = numerical_taylor(Psi, Fraction(1, 7), 2, 8, exact=True)
    f = numerical_taylor(Psi, Fraction(1, 7), 2, 8, policy=P, threads=4)
    for x, y in zip(e.coefficients, f.coefficients):
        assert abs(P.lift(x) - y) < mpmath.ldexp(1, -200)


def test_radius_diagnostic_examples():
    assert radius_diagnostic(NumericalTaylorSeries(1, (5,) + (0,) * 10), P) == 0
    r = Fraction(3, 7)
    geo = NumericalTaylorSeries(1, tuple(r**k for k in range(17)))
    assert abs(radius_diagnostic(geo, P) - P.lift(r)) < mpmath.ldexp(1, -200)
    with pytest.raises(DomainError):
        radius_diagnostic(NumericalTaylorSeries(1, (1,) * 5), P)


def test_radius_diagnostic_decreases_for_exp():
    Psi = UPSILON.compose(entire_target("exp"))
    s16 = numerical_taylor(Psi, 0, 2, 16, policy=P, threads=4)
    s8 = NumericalTaylorSeries(2, s16.coefficients[:9], 0)
    assert radius_diagnostic(s16, P) < radius_diagnostic(s8, P)


def test_series_csv():
    s = numerical_taylor(poly_target([1, 1]), 0, 1, 3, exact=True)
    lines = s.to_csv().splitlines()
    assert lines[0] == "kappa,coefficient_real,coefficient_imag,root_stat"
    assert lines[1].split(",")[:3] == ["0", "1.0", "0.0"]
    assert lines[1].endswith(",")
