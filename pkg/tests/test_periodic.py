import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from supershift_lab.errors import DomainError, PrecisionError, ValidationError
from supershift_lab.periodic import (
    FourierSpectrum,
    autocorrelate,
    autocorrelation_quadrature,
    check_chi,
    decay_certificate,
    exp_spectrum,
    multiplier,
    multiplier_identity_check,
    rate,
    rational_spectrum,
)
from supershift_lab.precision import PrecisionPolicy

P = PrecisionPolicy(256)
P128 = PrecisionPolicy(128)
TWO_PI = 2 * P.ctx.pi


def test_spectrum_is_periodic():
    s = exp_spectrum(4, policy=P)
    for a in (Fraction(1, 3), Fraction(-5, 2)):
        assert abs(s(a, P) - s(P.lift(a) + TWO_PI, P)) < mpmath.ldexp(1, -240)
    with pytest.raises(DomainError):
        FourierSpectrum(0, {0: 1})


def test_autocorrelate_examples():
    assert autocorrelate(FourierSpectrum(TWO_PI, {1: 1})).coefficients == {1: 1}
    c = Fraction(2, 3)
    assert autocorrelate(FourierSpectrum(TWO_PI, {-1: c, 1: c})).coefficients == {-1: c * c, 1: c * c}


@given(st.dictionaries(st.integers(-6, 6), st.fractions(-2, 2, max_denominator=5), min_size=1))
def test_autocorrelate_support_shrinks(coeffs):
    s = FourierSpectrum(TWO_PI, coeffs)
    assert set(autocorrelate(s).support) <= set(s.support)


def test_autocorrelation_quadrature_oracle():
    s = exp_spectrum(4, policy=P128)
    auto = autocorrelate(s)
    rng = random.Random(12)
    for _ in range(10):
        a = P128.lift(Fraction(rng.randrange(-2**20, 2**20), 2**18))
        assert abs(autocorrelation_quadrature(s, a, policy=P128) - auto(a, P128)) < mpmath.mpf(10) ** -20


def test_multiplier_examples():
    assert multiplier(7, 3, 0, TWO_PI, P) == 1
    R = 5
    m = multiplier(1, R, 1, TWO_PI, P)
    assert abs(m - P.ctx.mpc(P.ctx.cos(1), R * P.ctx.sin(1))) < mpmath.ldexp(1, -240)
    with pytest.raises(DomainError):
        multiplier(0, 1, 1, TWO_PI, P)


def test_multiplier_lower_bound():
    N, R, chi = 32, 8, 4
    M = chi * R
    for kappa in (-N, N):
        w = TWO_PI * kappa / (TWO_PI * M * N)
        bound = P.ctx.exp(N * M * (R * R - 1) / P.lift(4) * w * w)
        assert abs(multiplier(M * N, R, kappa, TWO_PI, P)) >= bound


@settings(max_examples=40)
@given(st.integers(1, 64), st.fractions(-1, 1, max_denominator=32), st.integers(-40, 40))
def test_multiplier_modulus_at_most_one(N, R, kappa):
    assert abs(multiplier(N, R, kappa, TWO_PI, P)) <= 1 + P.ctx.ldexp(1, -240)


@pytest.mark.parametrize("R", [1, -1])
def test_multiplier_unit_modulus(R):
    for N, kappa in ((3, 1), (16, -5), (32, 7)):
        assert abs(abs(multiplier(N, R, kappa, TWO_PI, P)) - 1) < mpmath.ldexp(1, -240)


def test_identity_examples():
    grid = [Fraction(k, 3) for k in range(-3, 4)]
    res, _ = multiplier_identity_check(FourierSpectrum(TWO_PI, {0: Fraction(3, 2)}), 4, grid, 5, P)
    assert res < mpmath.ldexp(1, -240)
    res, scale = multiplier_identity_check(FourierSpectrum(TWO_PI, {1: Fraction(1, 2)}), 3, grid, 1, P)
    assert res <= mpmath.ldexp(1, -240) * scale
    s = exp_spectrum(4, policy=P128)
    res, _ = multiplier_identity_check(s, 3, grid, 16, P128)
    assert res <= mpmath.mpf(10) ** -25


@pytest.mark.parametrize("K, N, R", [(2, 4, 2), (5, 12, Fraction(7, 2)), (8, 32, 5)])
def test_identity_residual_invariant(K, N, R):
    s = exp_spectrum(K, rate=Fraction(1, 2), policy=P)
    grid = [Fraction(k, 4) for k in range(-8, 9)]
    res, scale = multiplier_identity_check(s, R, grid, N, P)
    assert res <= P.half_tolerance * scale


def test_identity_guard_rule():
    with pytest.raises(PrecisionError):
        multiplier_identity_check(exp_spectrum(2, policy=P), 5, [0], 40, PrecisionPolicy(96))


def test_rate_and_chi():
    assert abs(rate(3, TWO_PI, 12, P) - P.lift(8) / (2 * 4 * 12)) < mpmath.ldexp(1, -240)
    check_chi(3, TWO_PI, 12, [2, 4, 8], range(-8, 9), P)
    with pytest.raises(ValidationError):
        check_chi(20, TWO_PI, 1, [1], [1], P)


def test_decay_certificate_exp_spectrum():
    s = exp_spectrum(8, policy=P)
    cert = decay_certificate(s, [Fraction(5, 4), 2, 4, 8], [2, 4, 6, 8], policy=P, threads=4)
    assert cert.implied_Rprime > 0
    for k in (1, 4, 8):
        assert abs(s.gamma(k)) <= cert.gamma_bound(k, P)


def test_decay_certificate_single_mode():
    s = FourierSpectrum(TWO_PI, {0: 1})
    cert = decay_certificate(s, [2, 4], [2, 4, 6], policy=P)
    assert all(r.certified for r in cert.records)
    assert all(b == 0 for r in cert.records for b in r.boundary.values())
    assert cert.gamma_bound(5, P) > 0 == s.gamma(5)


def test_decay_certificate_degrades_for_rational_spectrum():
    Rs = [Fraction(5, 4), Fraction(3, 2), 2, 3, 4, 6, 8, 12, 16]
    vals = []
    for K in (8, 16, 32):
        cert = decay_certificate(rational_spectrum(K, policy=P), Rs, [K // 4, K // 2, 3 * K // 4, K], policy=P,
                                 threads=4)
        vals.append(cert.implied_Rprime)
    assert vals[0] > vals[1] > vals[2]


def test_decay_certificate_validation():
    s = exp_spectrum(2, policy=P)
    with pytest.raises(ValidationError):
        decay_certificate(s, [2], [2, 4], policy=P)
    with pytest.raises(DomainError):
        decay_certificate(s, [1], [2, 4, 6], policy=P)


def test_certificate_csv():
    cert = decay_certificate(exp_spectrum(2, policy=P), [2], [1, 2, 3], policy=P)
    lines = cert.to_csv().splitlines()
    assert lines[0] == "R,N,kappa,multiplier_abs,gamma_bound,implied_Rprime"
    assert len(lines) == 1 + 3 * 2
