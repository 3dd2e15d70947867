"""Shifted Legendre expansion of the Bernstein-form polynomial on [0, 1].

All integrals are of polynomials and are taken from the monomial moments
``int_0^1 xi**k = 1/(k+1)``. Exact mode keeps ``sqrt(2 nu + 1)`` out of the
arithmetic by storing ``gamma_nu / sqrt(2 nu + 1)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .discrete_taylor import BernsteinFormPoly
from .errors import DomainError, ShapeError
from .precision import GaussianRational, PrecisionPolicy, csv_real_imag, magnitude, resolve, to_fraction


def legendre_integer_coefficients(nu: int) -> Tuple[int, ...]:
    """``(-1)**k binom(nu, k) binom(nu + k, k)`` for ``k = 0..nu``; ``l_nu`` is ``sqrt(2 nu + 1)`` times this."""
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    return tuple((-1) ** k * math.comb(nu, k) * math.comb(nu + k, k) for k in range(nu + 1))


def shifted_legendre(nu: int, policy: Optional[PrecisionPolicy] = None) -> List:
    """Monomial coefficients of the orthonormal ``l_nu`` on [0, 1] at policy precision."""
    policy = resolve(policy)
    s = policy.ctx.sqrt(2 * nu + 1)
    return [s * c for c in legendre_integer_coefficients(nu)]


@dataclass(frozen=True)
class ShiftedLegendreBasis:
    nu_max: int

    @property
    def rows(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(legendre_integer_coefficients(n) for n in range(self.nu_max + 1))

    def unscaled_inner(self, m: int, n: int) -> Fraction:
        """``int_0^1 L_m L_n`` for the integer-coefficient polynomials, exactly."""
        cm, cn = legendre_integer_coefficients(m), legendre_integer_coefficients(n)
        return sum((Fraction(x * y, i + j + 1) for i, x in enumerate(cm) for j, y in enumerate(cn)), Fraction(0))

    def orthonormality_defect(self) -> Fraction:
        """Largest ``|int l_m l_n - delta_mn|`` over the basis, exactly.

        Off the diagonal the scale ``sqrt((2m+1)(2n+1))`` multiplies an exact
        rational, so the entry vanishes iff that rational does.
        """
        worst = Fraction(0)
        for m in range(self.nu_max + 1):
            for n in range(m, self.nu_max + 1):
                g = self.unscaled_inner(m, n)
                d = (2 * m + 1) * g - 1 if m == n else g
                worst = max(worst, abs(d))
        return worst


def _poly_value(coeffs: Sequence, x):
    out = 0 * x
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _conj(x):
    return x.conjugate() if hasattr(x, "conjugate") else x


def _abs2(x):
    if isinstance(x, GaussianRational):
        return x.abs2()
    if isinstance(x, (int, Fraction)):
        return Fraction(x) * Fraction(x)
    return abs(x) ** 2


@dataclass(frozen=True)
class LegendreCoefficients:
    """``gamma_nu = sqrt(2 nu + 1) * gamma_tilde[nu]`` for ``nu = 0..N``."""

    gamma_tilde: Tuple
    R: object
    N: int
    b_prime: object
    eps_N: object

    def gamma(self, policy: Optional[PrecisionPolicy] = None) -> List:
        policy = resolve(policy)
        return [policy.ctx.sqrt(2 * n + 1) * policy.lift(g) for n, g in enumerate(self.gamma_tilde)]

    def norm_squared(self):
        """``sum |gamma_nu|**2``, exact in exact mode."""
        return sum((((2 * n + 1) * _abs2(g)) for n, g in enumerate(self.gamma_tilde)), 0 * _abs2(self.gamma_tilde[0]))

    def reconstruct(self, xi, policy: Optional[PrecisionPolicy] = None):
        """``sum gamma_nu l_nu(xi)``, in exact mode when ``xi`` and the coefficients are rational."""
        total = 0
        for n, g in enumerate(self.gamma_tilde):
            total = total + (2 * n + 1) * g * _poly_value(legendre_integer_coefficients(n), xi)
        return total

    def to_csv(self, bits: int = 256) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("nu", "gamma_real", "gamma_imag"))
        for n, g in enumerate(self.gamma(PrecisionPolicy(max(bits, 64)))):
            w.writerow((n, *csv_real_imag(g, bits)))
        return buf.getvalue()


def scaled_monomials(poly: BernsteinFormPoly, R, exact: bool, policy: PrecisionPolicy) -> List:
    """Monomial coefficients ``a_kappa R**kappa`` of ``xi -> T_N(R xi)``."""
    R = to_fraction(R) if exact else policy.lift(R)
    if R < 0:
        raise DomainError(f"R must be >= 0, got {R}")
    if exact:
        return [c * R**k for k, c in enumerate(poly.coefficients)]
    return [policy.lift(c) * R**k for k, c in enumerate(poly.coefficients)]


def project(poly: BernsteinFormPoly, R, *, exact: bool = False,
            policy: Optional[PrecisionPolicy] = None) -> LegendreCoefficients:
    """Legendre coefficients of ``xi -> T_N(R xi)`` by exact monomial moments."""
    policy = resolve(policy)
    b = scaled_monomials(poly, R, exact, policy)
    out = []
    for n in range(poly.N + 1):
        c = legendre_integer_coefficients(n)
        g = 0
        for k, bk in enumerate(b):
            m = 0
            for j, cj in enumerate(c):
                m += Fraction(cj, k + j + 1)
            g = g + bk * (m if exact else policy.lift(m))
        out.append(g)
    return LegendreCoefficients(tuple(out), to_fraction(R) if exact else R, poly.N, poly.b_prime, poly.eps_N)


def l2_norm_squared(poly: BernsteinFormPoly, R, *, exact: bool = False, policy: Optional[PrecisionPolicy] = None):
    """``int_0^1 |T_N(R xi)|**2 d xi`` from the monomial Gram matrix."""
    policy = resolve(policy)
    b = scaled_monomials(poly, R, exact, policy)
    total = 0
    for i, x in enumerate(b):
        for j, y in enumerate(b):
            w = Fraction(1, i + j + 1)
            total = total + x * _conj(y) * (w if exact else policy.lift(w))
    if isinstance(total, GaussianRational):
        return total.re
    return total.real if hasattr(total, "real") else total


def parseval_residual(poly: BernsteinFormPoly, coeffs: LegendreCoefficients, *, exact: bool = False,
                      policy: Optional[PrecisionPolicy] = None):
    d = l2_norm_squared(poly, coeffs.R, exact=exact, policy=policy) - coeffs.norm_squared()
    return abs(d) if exact else abs(resolve(policy).lift(d))


def identity_rhs(coeffs: LegendreCoefficients) -> List:
    """``(-1)**k binom(2k, k) sum_{nu >= k} sqrt(2 nu + 1) binom(nu + k, nu - k) gamma_nu``.

    Written with ``gamma_tilde`` the square roots pair up into ``2 nu + 1``.
    """
    N = coeffs.N
    out = []
    for k in range(N + 1):
        s = 0
        for n in range(k, N + 1):
            s = s + (2 * n + 1) * math.comb(n + k, n - k) * coeffs.gamma_tilde[n]
        out.append((-1) ** k * math.comb(2 * k, k) * s)
    return out


def coefficient_identity_check(poly: BernsteinFormPoly, coeffs: LegendreCoefficients, R=None, *,
                               exact: bool = False, policy: Optional[PrecisionPolicy] = None):
    """``max_k |a_k R**k - identity_rhs[k]|``; exactly 0 in exact mode.

    Raises :class:`ShapeError` when the two objects do not describe the same
    polynomial (order, base point or offset differ).
    """
    if poly.N != coeffs.N or poly.b_prime != coeffs.b_prime or poly.eps_N != coeffs.eps_N:
        raise ShapeError("Bernstein form and Legendre coefficients describe different polynomials")
    policy = resolve(policy)
    lhs = scaled_monomials(poly, coeffs.R if R is None else R, exact, policy)
    rhs = identity_rhs(coeffs)
    worst = Fraction(0) if exact else policy.ctx.mpf(0)
    for x, y in zip(lhs, rhs):
        d = x - y
        if d != 0:
            worst = max(worst, magnitude(d, policy))
    return worst


def identity_scale(poly: BernsteinFormPoly, R, policy: Optional[PrecisionPolicy] = None):
    """``max_k |a_k R**k|``, the natural scale for the identity residual."""
    policy = resolve(policy)
    return max(magnitude(x, policy) for x in scaled_monomials(poly, R, False, policy))
