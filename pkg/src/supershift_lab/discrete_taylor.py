"""Forward-difference form of the Bernstein extrapolation polynomial.

With ``Psi = psi o Upsilon`` and ``Upsilon(t) = 2t - 1`` the order-``N``
polynomial

    T_N(X) = sum_nu binom(N, nu) X**nu (1-X)**(N-nu) Psi(b' + nu h),  h = (1-eps_N)/N,

has monomial coefficients ``a_{N,kappa} = binom(N, kappa) Delta_h**kappa Psi(b')``.
Reading the degree-``kappa`` coefficient at ``N = M kappa`` gives the numerical
Taylor series with numerical precision ``1/M``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .errors import DomainError, ValidationError
from .precision import (
    PrecisionPolicy,
    csv_decimal,
    csv_real_imag,
    magnitude,
    parallel_map,
    resolve,
    to_fraction,
)
from .sampling import EpsilonSequence, zero_eps
from .supershift import Interval, TargetFunction


@dataclass(frozen=True)
class Upsilon:
    """The affine change of variable ``t -> 2t - 1`` between ``B`` and ``A``."""

    def forward(self, t):
        return 2 * t - 1

    def inverse(self, a):
        return (a + 1) / 2

    def inverse_interval(self, A: Interval) -> Interval:
        return Interval((A.lo + 1) / 2, (A.hi + 1) / 2)

    def compose(self, psi: TargetFunction) -> TargetFunction:
        """``Psi = psi o Upsilon`` on ``Upsilon^{-1}(A)``."""
        return TargetFunction(lambda t, ctx: psi.sampler(2 * t - 1, ctx), self.inverse_interval(psi.domain),
                              psi.kind, f"{psi.name}oU", psi.exact_capable)


UPSILON = Upsilon()


def _step(N: int, eps_N, exact: bool, policy: PrecisionPolicy):
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    eps = to_fraction(eps_N) if exact else policy.lift(eps_N)
    if not (0 <= eps < 1):
        raise DomainError(f"eps_N = {eps} not in [0, 1)")
    return (1 - eps) / N


def _samples(Psi: TargetFunction, b_prime, h, count: int, exact: bool, policy: PrecisionPolicy) -> List:
    if exact:
        b = to_fraction(b_prime)
        return [Psi.sample(b + j * h, exact=True) for j in range(count)]
    b = policy.lift(b_prime)
    return [Psi.sample(b + j * h, policy) for j in range(count)]


@dataclass(frozen=True)
class ForwardDifferenceTable:
    """Triangular table: ``values[kappa][j] = Delta_h**kappa Psi(b' + j h)``."""

    b_prime: object
    h: object
    values: Tuple[Tuple, ...]

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def leading(self) -> List:
        """``Delta_h**kappa Psi(b')`` for ``kappa = 0..N``."""
        return [row[0] for row in self.values]

    def recurrence_residual(self):
        """Largest ``|Delta^{k+1}(j) - (Delta^k(j+1) - Delta^k(j))|`` over the table."""
        worst = 0
        for k in range(self.N):
            lo, hi = self.values[k], self.values[k + 1]
            for j in range(len(hi)):
                d = hi[j] - (lo[j + 1] - lo[j])
                worst = max(worst, magnitude(d) if d != 0 else 0)
        return worst


def forward_differences(Psi: TargetFunction, b_prime, N: int, eps_N=0, *, exact: bool = False,
                        policy: Optional[PrecisionPolicy] = None) -> ForwardDifferenceTable:
    """Forward differences of ``Psi`` at ``b'`` with step ``(1 - eps_N)/N``.

    Float mode runs the recurrence ``Delta^{k+1} = shift(Delta^k) - Delta^k``;
    exact mode uses the alternating binomial sums
    ``Delta^k f(j) = sum_i (-1)**(k-i) binom(k, i) f(j+i)``.
    """
    policy = resolve(policy)
    h = _step(N, eps_N, exact, policy)
    f = _samples(Psi, b_prime, h, N + 1, exact, policy)
    rows: List[Tuple] = [tuple(f)]
    if exact:
        for k in range(1, N + 1):
            row = []
            for j in range(N + 1 - k):
                s = 0
                for i in range(k + 1):
                    s = s + (-1) ** (k - i) * math.comb(k, i) * f[j + i]
                row.append(s)
            rows.append(tuple(row))
    else:
        for k in range(1, N + 1):
            prev = rows[-1]
            rows.append(tuple(prev[j + 1] - prev[j] for j in range(len(prev) - 1)))
    return ForwardDifferenceTable(b_prime, h, tuple(rows))


@dataclass(frozen=True)
class BernsteinFormPoly:
    """``T_N(X) = sum_kappa coefficients[kappa] X**kappa`` with its defining samples."""

    coefficients: Tuple
    N: int
    eps_N: object
    b_prime: object
    samples: Tuple = ()

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.N + 1:
            raise ValidationError(f"degree-{self.N} form needs {self.N + 1} coefficients")

    def __call__(self, X):
        out = 0 * X
        for c in reversed(self.coefficients):
            out = out * X + c
        return out

    def direct(self, X):
        """Binomial-sum value ``sum binom(N, nu) X**nu (1-X)**(N-nu) Psi_nu``."""
        if len(self.samples) != self.N + 1:
            raise ValidationError("no samples attached to this form")
        total = 0 * X
        for nu, f in enumerate(self.samples):
            total = total + math.comb(self.N, nu) * X**nu * (1 - X) ** (self.N - nu) * f
        return total


def bernstein_form(Psi: TargetFunction, b_prime, N: int, eps_N=0, *, exact: bool = False,
                   policy: Optional[PrecisionPolicy] = None) -> BernsteinFormPoly:
    """Monomial coefficients ``a_{N,kappa} = binom(N, kappa) Delta**kappa Psi(b')``."""
    table = forward_differences(Psi, b_prime, N, eps_N, exact=exact, policy=policy)
    coeffs = tuple(math.comb(N, k) * d for k, d in enumerate(table.leading))
    return BernsteinFormPoly(coeffs, N, eps_N, b_prime, table.values[0])


def monomial_expansion(samples: Sequence, N: int) -> List:
    """Expand ``sum binom(N, nu) X**nu (1-X)**(N-nu) f_nu`` into monomial coefficients.

    Uses ``(1-X)**m = sum_j binom(m, j) (-X)**j`` directly, without differences.
    """
    if len(samples) != N + 1:
        raise ValidationError(f"need {N + 1} samples, got {len(samples)}")
    out = [0] * (N + 1)
    for nu, f in enumerate(samples):
        m = N - nu
        for j in range(m + 1):
            out[nu + j] = out[nu + j] + (-1) ** j * math.comb(N, nu) * math.comb(m, j) * f
    return out


def representation_residual(poly: BernsteinFormPoly):
    """Largest coefficient gap between the difference form and the direct expansion."""
    ref = monomial_expansion(poly.samples, poly.N)
    worst = 0
    for c, r in zip(poly.coefficients, ref):
        d = c - r
        if d != 0:
            worst = max(worst, magnitude(d))
    return worst


def rolle_quotient(Psi: TargetFunction, b_prime, kappa: int, N: int, eps_N=0, *, exact: bool = False,
                   policy: Optional[PrecisionPolicy] = None):
    """``((N/(1-eps_N)) Delta)**kappa Psi(b') / kappa!``, a divided-difference estimate of ``Psi^(kappa)/kappa!``."""
    if not 0 <= kappa <= N:
        raise DomainError(f"need 0 <= kappa <= N, got kappa={kappa}, N={N}")
    policy = resolve(policy)
    h = _step(N, eps_N, exact, policy)
    f = _samples(Psi, b_prime, h, kappa + 1, exact, policy)
    d = 0
    for i in range(kappa + 1):
        d = d + (-1) ** (kappa - i) * math.comb(kappa, i) * f[i]
    return d / (h**kappa * math.factorial(kappa))


def extrapolation_via_form(psi: TargetFunction, a, a_prime, N: int, eps_N=0, *, exact: bool = False,
                           policy: Optional[PrecisionPolicy] = None):
    """Bernstein extrapolation of ``psi`` at ``(a, a')`` computed as ``T_N(X)``.

    Reindexing ``nu -> N - nu`` in the extrapolation sum gives ``X = (1+a)/2``
    and ``b' = a'/2`` for ``Psi = psi o Upsilon``.
    """
    policy = resolve(policy)
    if exact:
        a, a_prime = to_fraction(a), to_fraction(a_prime)
    else:
        a, a_prime = policy.lift(a), policy.lift(a_prime)
    form = bernstein_form(UPSILON.compose(psi), a_prime / 2, N, eps_N, exact=exact, policy=policy)
    return form((1 + a) / 2)


# -- numerical Taylor series -------------------------------------------------


@dataclass(frozen=True)
class NumericalTaylorSeries:
    """Coefficients ``a_{M kappa, kappa}(Psi; b')`` for ``kappa = 0..kappa_max``."""

    M: int
    coefficients: Tuple
    b_prime: object = 0

    @property
    def kappa_max(self) -> int:
        return len(self.coefficients) - 1

    def root_stats(self, policy: Optional[PrecisionPolicy] = None) -> List:
        """``|a_kappa|**(1/kappa)`` for ``kappa >= 1`` (``None`` at ``kappa = 0``)."""
        policy = resolve(policy)
        out = [None]
        for k, c in enumerate(self.coefficients[1:], start=1):
            out.append(policy.ctx.root(magnitude(c, policy), k))
        return out

    def to_csv(self, bits: int = 256) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("kappa", "coefficient_real", "coefficient_imag", "root_stat"))
        stats = self.root_stats(PrecisionPolicy(max(bits, 64)))
        for k, (c, s) in enumerate(zip(self.coefficients, stats)):
            re, im = csv_real_imag(c, bits)
            w.writerow((k, re, im, "" if s is None else csv_decimal(s, bits)))
        return buf.getvalue()


def numerical_taylor(Psi: TargetFunction, b_prime, M: int, kappa_max: int = 16,
                     eps: Optional[EpsilonSequence] = None, *, exact: bool = False,
                     policy: Optional[PrecisionPolicy] = None, threads: Optional[int] = 1) -> NumericalTaylorSeries:
    """The ``(eps, 1/M)`` numerical Taylor series of ``Psi`` at ``b'``.

    Coefficient ``kappa`` is the degree-``kappa`` coefficient of the Bernstein
    form of order ``N = M kappa``; coefficient 0 is ``Psi(b')``. ``eps`` must
    provide ``eps_N`` for every ``N = M, 2M, ..., M kappa_max`` (zero if omitted).
    """
    if int(M) < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    if int(kappa_max) < 0:
        raise DomainError("kappa_max must be non-negative")
    policy = resolve(policy)
    Ns = [M * k for k in range(1, kappa_max + 1)]
    eps = zero_eps(Ns) if eps is None else eps
    head = _samples(Psi, b_prime, 0, 1, exact, policy)[0]

    def coeff(k: int):
        N = M * k
        return bernstein_form(Psi, b_prime, N, eps.at(N), exact=exact, policy=policy).coefficients[k]

    tail = parallel_map(coeff, range(1, kappa_max + 1), threads)
    return NumericalTaylorSeries(M, tuple([head] + tail), b_prime)


def radius_diagnostic(series: NumericalTaylorSeries, policy: Optional[PrecisionPolicy] = None):
    """``max |a_kappa|**(1/kappa)`` over ``kappa`` in ``[kappa_max/2, kappa_max]``.

    A finite-range proxy for ``limsup |a_kappa|**(1/kappa)``, which vanishes
    when the numerical Taylor series defines an entire function.
    """
    if series.kappa_max < 8:
        raise DomainError("radius diagnostic needs kappa_max >= 8")
    stats = series.root_stats(policy)
    lo = max(1, math.ceil(series.kappa_max / 2))
    return max(stats[lo:])
