from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from supershift_lab.errors import DomainError, SizeError, ValidationError
from supershift_lab.precision import PrecisionPolicy
from supershift_lab.sampling import (
    EpsilonFamily,
    FrequencyMatrix,
    FrequencyRow,
    SamplingKind,
    classify,
    gap_variance,
    has_constant_gaps,
    irregular_row,
    is_symmetric,
    log_eps,
    matches_regular,
    matrix_from_rows,
    minkowski_frequencies,
    power_eps,
    random_xi,
    regular_frequencies,
    regular_matrix,
    almost_regular_matrix,
    zero_eps,
)

unit_fracs = st.fractions(min_value=0, max_value=1, max_denominator=64)
eps_fracs = st.fractions(min_value=0, max_value=Fraction(63, 64), max_denominator=64)


@pytest.mark.parametrize(
    "N, eps, expected",
    [
        (2, 0, (1, 0, -1)),
        (2, Fraction(1, 2), (0, Fraction(-1, 2), -1)),
        (1, 0, (1, -1)),
    ],
)
def test_regular_examples(N, eps, expected):
    assert regular_frequencies(N, eps, exact=True).values == tuple(Fraction(x) for x in expected)


def test_regular_float_mode_matches_exact():
    p = PrecisionPolicy(128)
    row = regular_frequencies(7, Fraction(1, 3), policy=p)
    ref = regular_frequencies(7, Fraction(1, 3), exact=True)
    for x, y in zip(row.values, ref.values):
        assert abs(x - p.lift(y)) < p.ctx.mpf(2) ** -120


def test_regular_rejects_bad_eps():
    with pytest.raises(DomainError):
        regular_frequencies(4, 1, exact=True)
    with pytest.raises(DomainError):
        regular_frequencies(4, Fraction(-1, 4), exact=True)


@given(st.integers(1, 30), eps_fracs)
def test_regular_rows_have_constant_gaps(N, eps):
    row = regular_frequencies(N, eps, exact=True)
    assert set(row.gaps()) == {2 * (1 - eps) / N}
    assert row.values[-1] == -1
    assert matches_regular(row)


@pytest.mark.parametrize(
    "N, xi, expected",
    [
        (1, [0], (1, -1)),
        (2, [0, 0], (1, 0, -1)),
        (2, [1, 0], (Fraction(3, 4), Fraction(1, 4), Fraction(-1, 4), Fraction(-3, 4))),
    ],
)
def test_minkowski_examples(N, xi, expected):
    assert minkowski_frequencies(N, xi, exact=True).values == tuple(Fraction(x) for x in expected)


def test_minkowski_rejects_out_of_range_xi():
    with pytest.raises(DomainError):
        minkowski_frequencies(1, [2], exact=True)


def test_minkowski_single_point_row_is_rejected():
    # N=1 with xi=1 collapses both signs onto 0
    with pytest.raises(ValidationError):
        minkowski_frequencies(1, [1], exact=True)


def test_minkowski_cap():
    with pytest.raises(SizeError):
        minkowski_frequencies(21, [0] * 21, exact=True)


@settings(max_examples=40)
@given(st.lists(unit_fracs, min_size=2, max_size=7), st.randoms(use_true_random=False))
def test_minkowski_is_permutation_invariant(xi, rnd):
    N = len(xi)
    shuffled = list(xi)
    rnd.shuffle(shuffled)
    assert minkowski_frequencies(N, xi, exact=True) == minkowski_frequencies(N, shuffled, exact=True)


@given(st.integers(1, 12))
def test_minkowski_with_zero_xi_is_regular(N):
    assert minkowski_frequencies(N, [0] * N, exact=True) == regular_frequencies(N, 0, exact=True)


def test_minkowski_float_merges_collisions():
    p = PrecisionPolicy(128)
    row = minkowski_frequencies(3, [Fraction(1, 3)] * 3, policy=p)
    assert row.nu == 3
    assert is_symmetric(row, p)


def test_frequency_row_validation():
    with pytest.raises(ValidationError):
        FrequencyRow(1, (Fraction(3, 2), 0))
    with pytest.raises(ValidationError):
        FrequencyRow(1, (0, 1))
    with pytest.raises(ValidationError):
        FrequencyRow(1, (1,))


def test_classify_examples():
    assert classify(FrequencyMatrix((FrequencyRow(2, (1, Fraction(1, 2), -1)),), SamplingKind.IRREGULAR)) \
        is SamplingKind.IRREGULAR
    Ns = [1, 2, 3, 4]
    assert classify(regular_matrix(Ns, power_eps(Fraction(1, 2), Ns), exact=True)) is SamplingKind.REGULAR
    xi = random_xi(Ns, seed=3)
    assert classify(almost_regular_matrix(Ns, xi, exact=True)) is SamplingKind.ALMOST_REGULAR
    assert matrix_from_rows([irregular_row(N, seed=N) for N in (3, 4, 5)]).kind is SamplingKind.IRREGULAR


def test_irregular_row_has_varying_gaps():
    row = irregular_row(9, seed=11)
    assert row.values[0] == 1 and row.values[-1] == -1
    assert not has_constant_gaps(row)
    assert gap_variance(row) > 0


def test_gap_variance_zero_for_regular():
    assert gap_variance(regular_frequencies(6, Fraction(1, 5), exact=True)) == 0


def test_matrix_json_round_trip_exact():
    Ns = [1, 2, 3]
    H = almost_regular_matrix(Ns, random_xi(Ns, seed=1), exact=True)
    assert FrequencyMatrix.from_json(H.to_json()) == H


def test_matrix_json_round_trip_float():
    p = PrecisionPolicy(256)
    H = regular_matrix([3, 5], log_eps(Fraction(1, 4), [3, 5], p), policy=p)
    back = FrequencyMatrix.from_json(H.to_json(256), p)
    for r, s in zip(H.rows, back.rows):
        assert r.values == s.values


def test_epsilon_sequences():
    Ns = [1, 2, 4, 8]
    assert power_eps(Fraction(1, 2), Ns).at(4) == Fraction(1, 8)
    assert zero_eps(Ns).at(8) == 0
    with pytest.raises(DomainError):
        zero_eps(Ns).at(3)
    with pytest.raises(DomainError):
        power_eps(2, [1])
    fam = EpsilonFamily((zero_eps(Ns), power_eps(Fraction(1, 2), Ns)))
    assert fam.uniform_bound[2] == Fraction(1, 4)
