from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from supershift_lab.casebook import entire_target
from supershift_lab.errors import DomainError, ValidationError
from supershift_lab.precision import PrecisionPolicy
from supershift_lab.sampling import EpsilonFamily, irregular_row, power_eps, random_xi, regular_frequencies, zero_eps
from supershift_lab.supershift import (
    ExtrapolationDomain,
    Interval,
    REAL_LINE,
    Rule,
    TargetFunction,
    Verdict,
    extrapolate,
    judge,
    reflect,
    reflection_residual,
    snap,
    superoscillation_check,
    tcsp_sweep,
    translate,
    uniform_grid,
)
from supershift_lab.trigpoly import (
    IDENTITY_LIMIT,
    bernstein_coefficients,
    bernstein_trigpoly,
    error_certificate,
    lagrange_trigpoly,
    xi_product_trigpoly,
)

P = PrecisionPolicy(256)
fracs = st.fractions(min_value=-3, max_value=3, max_denominator=16)


def square_grid(lo, hi, step):
    return ExtrapolationDomain.grid(REAL_LINE, (lo, hi), (lo, hi), step)


@given(st.integers(1, 16), fracs, fracs)
def test_constant_is_reproduced(N, a, ap):
    psi = entire_target("one")
    row = regular_frequencies(N, 0, exact=True)
    assert extrapolate(psi, a, ap, row, bernstein_coefficients(N, a, exact=True), exact=True) == 1


@given(st.integers(1, 16), fracs, st.fractions(0, Fraction(15, 16), max_denominator=16))
def test_identity_reproduction(N, a, eps):
    psi = entire_target("identity")
    row = regular_frequencies(N, eps, exact=True)
    value = extrapolate(psi, a, 0, row, bernstein_coefficients(N, a, exact=True), exact=True)
    assert value == a - eps * (1 + a)


@given(st.integers(1, 16), fracs, fracs)
def test_bernstein_exact_for_affine_targets(N, a, ap):
    psi = TargetFunction(lambda t, ctx: 3 * t - Fraction(7, 5) if ctx is None else 3 * t - ctx.mpf(7) / 5,
                         exact_capable=True)
    row = regular_frequencies(N, 0, exact=True)
    value = extrapolate(psi, a, ap, row, bernstein_coefficients(N, a, exact=True), exact=True)
    assert value - psi(a + ap, exact=True) == 0


def test_extrapolate_domain_error():
    psi = TargetFunction(lambda t, ctx: ctx.log(t), Interval(0, mpmath.inf), name="log")
    row = regular_frequencies(4, 0, policy=P)
    with pytest.raises(DomainError):
        extrapolate(psi, 0, Fraction(1, 2), row, bernstein_coefficients(4, 0, policy=P), policy=P)


def test_extrapolate_length_mismatch():
    with pytest.raises(ValidationError):
        extrapolate(entire_target("one"), 0, 0, regular_frequencies(3, 0, policy=P), [1, 0], policy=P)


def test_extrapolation_domain_admissibility():
    A = Interval(-2, 5)
    dom = ExtrapolationDomain.grid(A, (-1, 1), (0, 3), Fraction(1, 2))
    assert dom.points
    for a, ap in dom.points:
        assert ap - 1 > -2 and ap + 1 < 5 and -2 < a + ap < 5
    with pytest.raises(DomainError):
        ExtrapolationDomain(A, ((0, -1),))


def test_grid_snapping():
    g = uniform_grid(-3, 3, 0.25)
    assert len(g) == 25 and g[0] == -3 and g[-1] == 3
    assert snap(0.1) == Fraction(round(Fraction(0.1) * 2**20), 2**20)


def test_translate_and_reflect_examples():
    psi = entire_target("cos")
    for t in (Fraction(-5, 4), Fraction(0), Fraction(7, 3)):
        assert translate(psi, 0)(t, P) == psi(t, P)
        assert reflect(reflect(psi))(t, P) == psi(t, P)
        assert translate(psi, Fraction(1, 2))(t, P) == psi(P.lift(t) - P.lift(Fraction(1, 2)), P)
    assert reflect(psi)(1, P) == P.ctx.cos(1)


def test_translate_moves_domain():
    psi = TargetFunction(lambda t, ctx: t, Interval(-1, 1))
    assert translate(psi, 2).domain == Interval(1, 3)
    assert reflect(TargetFunction(lambda t, ctx: t, Interval(0, 4))).domain == Interval(-4, 0)


def test_sampler_memo_is_deterministic():
    psi = entire_target("exp")
    assert psi(Fraction(1, 3), P) is psi(Fraction(1, 3), P)
    assert entire_target("exp")(Fraction(1, 3), P) == psi(Fraction(1, 3), P)


def test_exact_sampling_of_transcendental_is_dyadic_and_signed():
    v = entire_target("sin")(-1, P, exact=True)
    assert isinstance(v, Fraction) and v < 0
    assert abs(P.lift(v) - P.ctx.sin(-1)) < mpmath.ldexp(1, -250)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["cos", "exp", "exp_i", "sinh", "poly5"]), st.integers(1, 24), fracs, fracs,
       st.fractions(0, Fraction(7, 8), max_denominator=8))
def test_reflection_identity(name, N, a, ap, eps):
    assert reflection_residual(entire_target(name), a, ap, N, eps, P) <= P.half_tolerance


def test_judge():
    assert judge({8: 0.5, 16: 0.1, 32: 0.01, 64: 1e-4}) is Verdict.CONVERGING
    assert judge({8: 0, 16: 0, 32: 0}) is Verdict.CONVERGING
    assert judge({8: 1, 16: 10, 32: 1e4}) is Verdict.DIVERGING
    assert judge({8: 0.5, 16: 0.1, 32: 0.2}) is Verdict.INCONCLUSIVE
    assert judge({8: 0.5, 16: 0.1, 32: 0.01}) is Verdict.INCONCLUSIVE


def test_constant_sweep_converges_with_zero_errors():
    Ns = [8, 16, 32, 64]
    rep = tcsp_sweep(entire_target("one"), square_grid(-3, 3, 1), Ns, EpsilonFamily((zero_eps(Ns),)), policy=P)
    assert rep.verdict is Verdict.CONVERGING
    assert all(v == 0 for v in rep.per_N.values())


@pytest.mark.parametrize("name", ["exp_i", "cos", "sinh", "poly5"])
def test_monotone_refinement_for_entire_targets(name):
    Ns = [8, 64]
    rep = tcsp_sweep(entire_target(name), square_grid(-3, 3, Fraction(1, 2)), Ns,
                     EpsilonFamily((zero_eps(Ns),)), policy=P, threads=4)
    assert rep.per_N[64] < rep.per_N[8]


def test_family_uniformity():
    Ns = [8, 16, 64]
    fam = EpsilonFamily((zero_eps(Ns), power_eps(1, Ns), power_eps(2, Ns)))
    rep = tcsp_sweep(entire_target("cos"), square_grid(-3, 3, 1), Ns, fam, policy=P, threads=4)
    for N in Ns:
        assert rep.uniform_sup[N] - max(m[N] for m in rep.per_family_member.values()) == 0
    at64 = [m[64] for m in rep.per_family_member.values()]
    assert max(at64) <= 10 * min(at64)


def test_sweep_is_thread_independent():
    Ns = [4, 8, 12]
    fam = EpsilonFamily((zero_eps(Ns), power_eps(1, Ns)))
    dom = square_grid(-2, 2, Fraction(1, 2))
    r1 = tcsp_sweep(entire_target("exp"), dom, Ns, fam, policy=P, threads=1)
    r8 = tcsp_sweep(entire_target("exp"), dom, Ns, fam, policy=P, threads=8)
    assert r1.to_csv() == r8.to_csv()


def test_sweep_rejects_non_increasing_N():
    with pytest.raises(ValidationError):
        tcsp_sweep(entire_target("one"), square_grid(0, 1, 1), [8, 8], EpsilonFamily((zero_eps([8]),)), policy=P)


def test_report_csv_columns():
    Ns = [2, 4, 6]
    rep = tcsp_sweep(entire_target("cos"), square_grid(0, 1, 1), Ns, EpsilonFamily((zero_eps(Ns),)),
                     rule=Rule.LAGRANGE, policy=P)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "rule,iota,N,a,a_prime,abs_error"
    assert lines[1].startswith("Lagrange,0,2,")
    assert len(lines) == 1 + len(rep.records)


def test_superoscillation_regular_family_errors_shrink():
    Ns = [8, 16, 32, 64]
    x_grid = uniform_grid(-5, 5, 1)
    rep = superoscillation_check(lambda N, lam: bernstein_trigpoly(N, lam, policy=P), IDENTITY_LIMIT,
                                 x_grid, [3], Ns, policy=P)
    vals = [rep.per_N[N] for N in Ns]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_superoscillation_xi_family_errors_shrink():
    Ns = [4, 8, 16]
    xi = random_xi(Ns, seed=7)
    rep = superoscillation_check(lambda N, lam: xi_product_trigpoly(N, xi.row(N), lam, policy=P), IDENTITY_LIMIT,
                                 uniform_grid(-2, 2, 1), [2], Ns, policy=P)
    vals = [rep.per_N[N] for N in Ns]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_superoscillation_lagrange_irregular_within_certificate():
    Ns = [6, 12, 18, 24]
    x_grid = uniform_grid(-2, 2, Fraction(1, 2))
    rep = superoscillation_check(lambda N, lam: lagrange_trigpoly(irregular_row(N, N), lam, policy=P),
                                 IDENTITY_LIMIT, x_grid, [2], Ns, policy=P)
    assert rep.verdict is Verdict.CONVERGING
    for N in Ns:
        assert rep.per_N[N] <= error_certificate("LagrangeFactorial", 2, 2, N, P).bound_value
