"""Generalized trigonometric polynomials and their superoscillating families.

A :class:`TrigPoly` is a finite sum ``sum_nu C_nu exp(i h_nu z)`` with real
frequencies ``h_nu`` in decreasing order. The builders below attach the three
amplitude rules used throughout the package: Bernstein (binomial) weights on a
regular row, Lagrange basis values on an arbitrary row, and the expanded
product over an almost-regular Minkowski row.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

from .errors import DegenerateNodesError, DomainError, ValidationError
from .precision import (
    GaussianRational,
    PrecisionPolicy,
    ascending_sum,
    decimal_string,
    is_exact,
    real_imag_strings,
    resolve,
    to_fraction,
)
from .sampling import FrequencyRow, minkowski_points, regular_frequencies

# |Im z| * max|h| beyond this would leave the range we test against
_EXPONENT_LIMIT = 2**40


class CertificateKind(str, enum.Enum):
    LAGRANGE_FACTORIAL = "LagrangeFactorial"
    HERMITE_CONTOUR = "HermiteContour"
    EXP_GROWTH = "ExpGrowth"


@dataclass(frozen=True)
class TrigPoly:
    """Finite list of ``(amplitude, frequency)`` pairs with strictly decreasing frequencies."""

    terms: Tuple[Tuple[object, object], ...]
    meta: Mapping = field(default_factory=lambda: {"kind": "Custom"}, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((c, h) for c, h in self.terms))
        if not self.terms:
            raise ValidationError("a trigonometric polynomial needs at least one term")
        hs = self.frequencies
        if any(not (b < a) for a, b in zip(hs, hs[1:])):
            raise ValidationError("frequencies must be strictly decreasing")

    @property
    def amplitudes(self) -> List:
        return [c for c, _ in self.terms]

    @property
    def frequencies(self) -> List:
        return [h for _, h in self.terms]

    def __call__(self, z, policy: Optional[PrecisionPolicy] = None):
        return evaluate(self, z, policy)

    def amplitude_sum(self):
        return ascending_sum(self.amplitudes, 0)

    def to_json(self, bits: int = 256) -> str:
        terms = []
        for c, h in self.terms:
            re, im = real_imag_strings(c, bits)
            terms.append({"amplitude": {"re": re, "im": im}, "frequency": decimal_string(h, bits)})
        meta = {k: (v if isinstance(v, (int, str, float, type(None))) else str(v)) for k, v in self.meta.items()}
        return json.dumps({"meta": meta, "terms": terms})

    @classmethod
    def from_json(cls, text: str, policy: Optional[PrecisionPolicy] = None) -> "TrigPoly":
        policy = resolve(policy)
        data = json.loads(text)

        def num(s: str):
            return Fraction(s) if ("/" in s or s.lstrip("+-").isdigit()) else policy.lift(s)

        terms = []
        for t in data["terms"]:
            re, im = num(t["amplitude"]["re"]), num(t["amplitude"]["im"])
            if im == 0:
                amp = re
            elif is_exact(re) and is_exact(im):
                amp = GaussianRational(re, im)
            else:
                amp = policy.ctx.mpc(policy.lift(re), policy.lift(im))
            terms.append((amp, num(t["frequency"])))
        return cls(tuple(terms), data.get("meta", {"kind": "Custom"}))


# -- amplitude rules ---------------------------------------------------------


def bernstein_coefficients(
    N: int, a, *, exact: bool = False, policy: Optional[PrecisionPolicy] = None
) -> List:
    """``C_nu = binom(N, nu) ((1+a)/2)**(N-nu) ((1-a)/2)**nu`` for ``nu = 0..N``.

    In float mode the policy must satisfy the precision guard rule for
    ``(N, a)``; :class:`~supershift_lab.errors.PrecisionError` otherwise.
    """
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if exact:
        a = to_fraction(a)
    else:
        policy = resolve(policy)
        policy.require(N, a)
        a = policy.lift(a)
    p = (1 + a) / 2
    q = (1 - a) / 2
    return [math.comb(N, nu) * p ** (N - nu) * q**nu for nu in range(N + 1)]


def lagrange_weights(nodes, a, *, exact: bool = False, policy: Optional[PrecisionPolicy] = None) -> List:
    """Lagrange basis values ``w_nu = prod_{nu' != nu} (a - h_nu') / (h_nu - h_nu')``.

    ``nodes`` is a :class:`FrequencyRow` with ``nu(N) = N`` or any sequence of
    pairwise distinct reals. When ``a`` equals a node the indicator vector of
    that node is returned.
    """
    if isinstance(nodes, FrequencyRow):
        if nodes.nu != nodes.N:
            raise ValidationError("Lagrange weights need a row with nu(N) = N")
        hs = list(nodes.values)
    else:
        hs = list(nodes)
    if exact:
        hs = [to_fraction(h) for h in hs]
        a = to_fraction(a)
        tol = None
    else:
        policy = resolve(policy)
        hs = [policy.lift(h) for h in hs]
        a = policy.lift(a)
        tol = policy.merge_tolerance
    n = len(hs)
    for i in range(n):
        for j in range(i + 1, n):
            d = hs[i] - hs[j]
            if d == 0 or (tol is not None and abs(d) <= tol):
                raise DegenerateNodesError(f"nodes {i} and {j} coincide")
    one = Fraction(1) if exact else policy.lift(1)
    for j, h in enumerate(hs):
        if a == h:
            return [one if i == j else 0 * one for i in range(n)]
    weights = []
    for i, h in enumerate(hs):
        num = one
        den = one
        for j, g in enumerate(hs):
            if j != i:
                num = num * (a - g)
                den = den * (h - g)
        weights.append(num / den)
    return weights


# -- builders ----------------------------------------------------------------


def bernstein_trigpoly(N: int, a, eps_N=0, *, exact: bool = False,
                       policy: Optional[PrecisionPolicy] = None) -> TrigPoly:
    row = regular_frequencies(N, eps_N, exact=exact, policy=policy)
    coeffs = bernstein_coefficients(N, a, exact=exact, policy=policy)
    return TrigPoly(tuple(zip(coeffs, row.values)), {"kind": "Bernstein", "N": N, "a": str(a), "eps": str(eps_N)})


def lagrange_trigpoly(row: FrequencyRow, a, *, exact: bool = False,
                      policy: Optional[PrecisionPolicy] = None) -> TrigPoly:
    w = lagrange_weights(row, a, exact=exact, policy=policy)
    return TrigPoly(tuple(zip(w, row.values)), {"kind": "Lagrange", "N": row.N, "a": str(a)})


def xi_product_trigpoly(N: int, xi_row: Sequence, a, *, exact: bool = False,
                        policy: Optional[PrecisionPolicy] = None) -> TrigPoly:
    """Expanded form of the product over the Minkowski pairs ``±(1/N)(1 - xi_k/N)``."""
    if exact:
        a = to_fraction(a)
    else:
        policy = resolve(policy)
        a = policy.lift(a)
    pts = minkowski_points(N, xi_row, (1 + a) / 2, (1 - a) / 2, exact=exact, policy=policy)
    return TrigPoly(tuple((w, h) for h, w in pts), {"kind": "XiProduct", "N": N, "a": str(a)})


# -- evaluation --------------------------------------------------------------


def evaluate(T: TrigPoly, z, policy: Optional[PrecisionPolicy] = None):
    """``sum_nu C_nu exp(i h_nu z)`` summed in ascending ``nu`` at policy precision."""
    policy = resolve(policy)
    ctx = policy.ctx
    z = policy.lift(z)
    hmax = max(abs(policy.lift(h)) for h in T.frequencies)
    if abs(ctx.im(z)) * hmax > _EXPONENT_LIMIT:
        raise OverflowError("|Im z| * max|h| exceeds the supported exponent range")
    total = ctx.mpc(0)
    for c, h in T.terms:
        total += policy.lift(c) * ctx.expj(policy.lift(h) * z)
    return total


def eval_regular_closed_form(N: int, eps_N, lam, z, policy: Optional[PrecisionPolicy] = None):
    """``exp(-i eps z) (cos(z(1-eps)/N) + i lam sin(z(1-eps)/N))**N``.

    The node ``h_nu = 1 - 2 (nu + eps (N - nu)) / N`` equals
    ``(1 - eps)(1 - 2 nu/N) - eps``, so the common phase is ``exp(-i eps z)``.
    """
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    policy = resolve(policy)
    ctx = policy.ctx
    eps, lam, z = policy.lift(eps_N), policy.lift(lam), policy.lift(z)
    if not (0 <= eps < 1):
        raise DomainError(f"eps_N = {eps} not in [0, 1)")
    w = z * (1 - eps) / N
    return ctx.expj(-eps * z) * (ctx.cos(w) + ctx.mpc(0, 1) * lam * ctx.sin(w)) ** N


def eval_xi_product(N: int, xi_row: Sequence, a, z, policy: Optional[PrecisionPolicy] = None):
    """``prod_k ((1+a)/2 e^{i u_k} + (1-a)/2 e^{-i u_k})`` with ``u_k = (z/N)(1 - xi_k/N)``."""
    if len(xi_row) != N:
        raise ValidationError(f"need {N} xi values, got {len(xi_row)}")
    policy = resolve(policy)
    ctx = policy.ctx
    a, z = policy.lift(a), policy.lift(z)
    p, q = (1 + a) / 2, (1 - a) / 2
    out = ctx.mpc(1)
    for x in xi_row:
        x = policy.lift(x)
        if not (0 <= x <= 1):
            raise DomainError(f"xi = {x} not in [0, 1]")
        e = ctx.expj(z / N * (1 - x / N))
        out *= p * e + q / e
    return out


# -- certificates ------------------------------------------------------------


@dataclass(frozen=True)
class ErrorCertificate:
    bound_value: object
    formula_tag: CertificateKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "formula_tag", CertificateKind(self.formula_tag))
        if not (self.bound_value >= 0):
            raise ValidationError("certificate bound must be non-negative")


def error_certificate(kind, a_or_lambda, z, N: int, policy: Optional[PrecisionPolicy] = None) -> ErrorCertificate:
    """Closed-form bound on ``|exp(i a z) - T_N[a](z)|``.

    ``LagrangeFactorial``: ``((|lam|+1)|x|)**(N+1) / (N+1)!`` for real ``x`` and
    nodes in [-1, 1]. ``HermiteContour``: ``(|a|+2) exp((|a|+2)|z|) / 2``, a
    boundedness certificate that does not decay in ``N``. ``ExpGrowth``:
    ``exp((|a|+1)|z|)``, the growth bound of the product family.
    """
    try:
        kind = CertificateKind(kind)
    except ValueError:
        raise DomainError(f"unknown certificate kind {kind!r}") from None
    policy = resolve(policy)
    ctx = policy.ctx
    lam = abs(policy.lift(a_or_lambda))
    z = policy.lift(z)
    if kind is CertificateKind.LAGRANGE_FACTORIAL:
        if ctx.im(z) != 0:
            raise DomainError("the factorial remainder bound holds for real x only")
        bound = ((lam + 1) * abs(z)) ** (N + 1) / ctx.factorial(N + 1)
    elif kind is CertificateKind.HERMITE_CONTOUR:
        bound = (lam + 2) * ctx.exp((lam + 2) * abs(z)) / 2
    else:
        bound = ctx.exp((lam + 1) * abs(z))
    return ErrorCertificate(bound, kind)


@dataclass(frozen=True)
class SuperoscillationLimit:
    """Limit pair ``(g, C)`` of a superoscillating family.

    ``U`` is the real interval of ``x`` values and ``V`` a union of open
    parameter intervals on which the family superoscillates.
    """

    g: Callable
    C: Callable
    U: Tuple[float, float] = (-math.inf, math.inf)
    V: Tuple[Tuple[float, float], ...] = ((-math.inf, -1.0), (1.0, math.inf))

    def in_V(self, lam) -> bool:
        return any(lo < float(lam) < hi for lo, hi in self.V)

    def check(self, lambda_grid: Sequence, policy: Optional[PrecisionPolicy] = None) -> None:
        """Raise unless ``|g(lam)| > 1`` and ``C(lam) != 0`` on the grid points inside ``V``."""
        policy = resolve(policy)
        for lam in lambda_grid:
            if not self.in_V(lam):
                continue
            if not abs(policy.lift(self.g(lam))) > 1 or policy.lift(self.C(lam)) == 0:
                raise ValidationError(f"lambda={lam} is not a superoscillating parameter")

    def target(self, lam, x, policy: Optional[PrecisionPolicy] = None):
        policy = resolve(policy)
        ctx = policy.ctx
        return policy.lift(self.C(lam)) * ctx.expj(policy.lift(self.g(lam)) * policy.lift(x))


IDENTITY_LIMIT = SuperoscillationLimit(g=lambda lam: lam, C=lambda lam: 1)


@dataclass(frozen=True)
class XiProduct:
    """Product form of the almost-regular polynomial, evaluated without expansion."""

    N: int
    xi_row: Tuple
    a: object

    def __call__(self, z, policy: Optional[PrecisionPolicy] = None):
        return eval_xi_product(self.N, self.xi_row, self.a, z, policy)
