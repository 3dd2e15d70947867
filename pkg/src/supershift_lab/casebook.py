"""Concrete targets: entire restrictions, a glued non-analytic function, its warped
version on the whole line, and the Lagrange divergence of ``|t|``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import DomainError, NodeCollisionError, ValidationError
from .precision import (
    PrecisionPolicy,
    csv_decimal,
    csv_real_imag,
    parallel_map,
    resolve,
    to_fraction,
)
from .sampling import FrequencyRow, regular_frequencies
from .supershift import Interval, REAL_LINE, TargetFunction, TargetKind, extrapolate
from .trigpoly import bernstein_coefficients, lagrange_weights

HALF = Fraction(1, 2)
DEFAULT_RHO0 = Fraction(1, 2)
PERTURB_RADIUS = Fraction(1, 2**20)
PERTURB_SHIFT = Fraction(1, 2**16)


# -- entire restrictions -----------------------------------------------------


def _poly5(t, ctx):
    """``sum_{k<=5} t**k / k!`` by Horner, rational when ``ctx`` is None."""
    out = 0
    for k in range(5, -1, -1):
        c = Fraction(1, math.factorial(k)) if ctx is None else ctx.mpf(1) / math.factorial(k)
        out = out * t + c
    return out


_GALLERY: Dict[str, Tuple[Callable, bool, TargetKind]] = {
    "cos": (lambda t, ctx: ctx.cos(t), False, TargetKind.ENTIRE),
    "sin": (lambda t, ctx: ctx.sin(t), False, TargetKind.ENTIRE),
    "exp": (lambda t, ctx: ctx.exp(t), False, TargetKind.ENTIRE),
    "exp_i": (lambda t, ctx: ctx.expj(t), False, TargetKind.ENTIRE),
    "sinh": (lambda t, ctx: ctx.sinh(t), False, TargetKind.ENTIRE),
    "cosh": (lambda t, ctx: ctx.cosh(t), False, TargetKind.ENTIRE),
    "poly5": (_poly5, True, TargetKind.ENTIRE),
    "one": (lambda t, ctx: Fraction(1) if ctx is None else ctx.mpf(1), True, TargetKind.ENTIRE),
    "identity": (lambda t, ctx: t, True, TargetKind.ENTIRE),
    "square": (lambda t, ctx: t * t, True, TargetKind.ENTIRE),
    "abs": (lambda t, ctx: abs(t), True, TargetKind.ABS),
}

TARGET_NAMES = tuple(_GALLERY)


def entire_target(name: str) -> TargetFunction:
    """Restriction to the real line of a gallery function (``abs`` included for contrast)."""
    try:
        fn, exact_capable, kind = _GALLERY[name]
    except KeyError:
        raise DomainError(f"unknown target {name!r}; choose from {', '.join(TARGET_NAMES)}") from None
    return TargetFunction(fn, REAL_LINE, kind, name, exact_capable)


# -- glued function ----------------------------------------------------------


def _default_minus(z):
    return z - HALF


def _default_plus(z):
    return 2 * (z - HALF)


@dataclass(frozen=True)
class GluedFunction:
    """``g = G_minus`` left of ``b = 1/2`` and ``G_plus`` right of it; ``psi0(a) = g((1+a)/2)``.

    Construction checks that the pieces agree at 1/2 and that their slopes
    there differ, so ``psi0`` is continuous and not differentiable at 0. The
    evaluators must accept Fractions as well as mpmath numbers.
    """

    G_minus: Callable = _default_minus
    G_plus: Callable = _default_plus
    rho0: Fraction = DEFAULT_RHO0
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy, compare=False)

    def __post_init__(self) -> None:
        if not self.rho0 > 0:
            raise DomainError("rho0 must be positive")
        p = self.policy
        half = p.lift(HALF)
        lo, hi = p.lift(self.G_minus(half)), p.lift(self.G_plus(half))
        if abs(lo - hi) > p.half_tolerance * max(1, abs(lo)):
            raise ValidationError("G_minus(1/2) != G_plus(1/2)")
        d = p.ctx.ldexp(1, -(p.mantissa_bits // 4))
        s_lo = (p.lift(self.G_minus(half + d)) - p.lift(self.G_minus(half - d))) / (2 * d)
        s_hi = (p.lift(self.G_plus(half + d)) - p.lift(self.G_plus(half - d))) / (2 * d)
        if abs(s_lo - s_hi) <= p.ctx.ldexp(1, -(p.mantissa_bits // 8)):
            raise ValidationError("G_minus and G_plus have the same slope at 1/2; the glue is smooth")

    @property
    def domain(self) -> Interval:
        r = float(self.rho0)
        return Interval(-1 - r, 1 + r)

    def g(self, b):
        return self.G_minus(b) if 2 * b < 1 else self.G_plus(b)


def glued_psi0(G: GluedFunction, a):
    """``psi0(a) = g((1+a)/2)`` on ``(-1-rho0, 1+rho0)``."""
    if a not in G.domain:
        raise DomainError(f"a = {a} outside {G.domain}")
    return G.g((1 + a) / 2)


def psi0_target(G: GluedFunction) -> TargetFunction:
    return TargetFunction(lambda t, ctx: glued_psi0(G, t), G.domain, TargetKind.GLUED, "psi0", True)


# -- warp --------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaMap:
    """``Theta(a) = (2(1+rho0)/pi) atan(a tan(pi/(2(1+rho0))))``, an odd increasing
    bijection of the real line onto ``(-1-rho0, 1+rho0)`` fixing -1, 0 and 1.
    """

    rho0: Fraction = DEFAULT_RHO0

    def __post_init__(self) -> None:
        if not self.rho0 > 0:
            raise DomainError("rho0 must be positive")

    def _consts(self, policy: PrecisionPolicy):
        r = 1 + policy.lift(self.rho0)
        return r, policy.ctx.tan(policy.ctx.pi / (2 * r))

    @property
    def bound(self) -> float:
        return 1 + float(self.rho0)

    def forward(self, a, policy: Optional[PrecisionPolicy] = None):
        policy = resolve(policy)
        ctx = policy.ctx
        a = policy.lift(a)
        if a == 0 or abs(a) == 1:
            return a
        r, t = self._consts(policy)
        return 2 * r / ctx.pi * ctx.atan(a * t)

    def inverse(self, alpha, policy: Optional[PrecisionPolicy] = None):
        policy = resolve(policy)
        ctx = policy.ctx
        alpha = policy.lift(alpha)
        if alpha == 0 or abs(alpha) == 1:
            return alpha
        r, t = self._consts(policy)
        if not abs(alpha) < r:
            raise DomainError(f"alpha = {alpha} outside the range (-{r}, {r})")
        return ctx.tan(alpha * ctx.pi / (2 * r)) / t


def warped_frequencies(theta: ThetaMap, N: int, eps_N=0, policy: Optional[PrecisionPolicy] = None) -> FrequencyRow:
    """``Theta^{-1}`` of the regular row; ends stay at -1 and (for ``eps_N = 0``) +1."""
    policy = resolve(policy)
    row = regular_frequencies(N, eps_N, policy=policy)
    return FrequencyRow(N, tuple(theta.inverse(h, policy) for h in row.values))


def warped_target(G: GluedFunction, theta: ThetaMap) -> TargetFunction:
    """``psi = psi0 o Theta``, defined on the whole line."""

    def sampler(t, ctx):
        return glued_psi0(G, theta.forward(t, PrecisionPolicy(ctx.prec)))

    return TargetFunction(sampler, REAL_LINE, TargetKind.WARPED, "psi0oTheta", False)


def warped_extrapolate(G: GluedFunction, theta: ThetaMap, a, N: int, eps_N=0,
                       policy: Optional[PrecisionPolicy] = None):
    """``sum binom(N,nu) ((1+Theta(a))/2)**(N-nu) ((1-Theta(a))/2)**nu psi(h_nu)``
    over the warped row, with ``psi = psi0 o Theta``.
    """
    policy = resolve(policy)
    alpha = theta.forward(a, policy)
    row = warped_frequencies(theta, N, eps_N, policy)
    coeffs = bernstein_coefficients(N, alpha, policy=policy)
    return extrapolate(warped_target(G, theta), alpha, 0, row, coeffs, policy=policy)


@dataclass
class ValueTable:
    """Per-``N`` values of an approximation against a target value."""

    target: object
    values: Dict[int, object]
    errors: Dict[int, object]
    notes: List[str] = field(default_factory=list)
    a_eval: object = None

    def to_csv(self, bits: int = 256) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("N", "value_real", "value_imag", "abs_error"))
        for N in sorted(self.values):
            w.writerow((N, *csv_real_imag(self.values[N], bits), csv_decimal(self.errors[N], bits)))
        return buf.getvalue()

    def growth_ratio(self):
        errs = list(self.errors.values())
        return max(errs) / min(errs)


def warped_table(G: GluedFunction, theta: ThetaMap, a, N_list: Sequence[int], eps=None,
                 policy: Optional[PrecisionPolicy] = None, threads: Optional[int] = 1) -> ValueTable:
    """Warped extrapolation at ``a`` for each ``N`` against ``psi(a) = psi0(Theta(a))``."""
    policy = resolve(policy)
    target = glued_psi0(G, theta.forward(a, policy))
    eps_at = (lambda N: 0) if eps is None else eps.at
    vals = parallel_map(lambda N: warped_extrapolate(G, theta, a, N, eps_at(N), policy), list(N_list), threads)
    values = dict(zip(N_list, vals))
    return ValueTable(target, values, {N: abs(v - target) for N, v in values.items()}, a_eval=a)


# -- Lagrange divergence -----------------------------------------------------


def _nudge(a: Fraction, N: int, auto_perturb: bool, notes: List[str]) -> Fraction:
    nodes = [1 - Fraction(2 * nu, N) for nu in range(N + 1)]
    near = [h for h in nodes if abs(a - h) < PERTURB_RADIUS]
    if not near:
        return a
    if not auto_perturb:
        raise NodeCollisionError(f"a_eval = {a} is within 2^-20 of node {near[0]} for N = {N}")
    shifted = a + PERTURB_SHIFT if a + PERTURB_SHIFT <= 1 else a - PERTURB_SHIFT
    notes.append(f"N={N}: a_eval {a} shifted to {shifted} (node {near[0]})")
    return shifted


def abs_lagrange_divergence(a_eval, N_list: Sequence[int], psi: Optional[Callable] = None, *,
                            auto_perturb: bool = True, threads: Optional[int] = 1,
                            policy: Optional[PrecisionPolicy] = None) -> ValueTable:
    """``| psi(a) - sum_nu w_nu(a) psi(1 - 2 nu/N) |`` for Lagrange weights on the
    equispaced nodes of ``[-1, 1]``; ``psi`` defaults to ``|t|``.

    Inputs are rational, so everything is computed exactly and converted at
    the end. Evaluation points within ``2**-20`` of a node are moved by
    ``2**-16`` when ``auto_perturb`` is set (recorded in ``notes``), and raise
    :class:`NodeCollisionError` otherwise.
    """
    policy = resolve(policy)
    psi = abs if psi is None else psi
    a0 = to_fraction(a_eval)
    if not -1 <= a0 <= 1:
        raise DomainError(f"a_eval = {a0} not in [-1, 1]")
    notes: List[str] = []
    points = {N: _nudge(a0, N, auto_perturb, notes) for N in N_list}

    def one(N: int):
        a = points[N]
        row = regular_frequencies(N, 0, exact=True)
        w = lagrange_weights(row, a, exact=True)
        value = sum((wi * psi(h) for wi, h in zip(w, row.values)), Fraction(0))
        return value, abs(psi(a) - value)

    out = parallel_map(one, list(N_list), threads)
    values = {N: v for N, (v, _) in zip(N_list, out)}
    errors = {N: policy.lift(e) for N, (_, e) in zip(N_list, out)}
    return ValueTable(psi(a0), values, errors, notes, a0)
