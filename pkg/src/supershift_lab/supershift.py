"""Supershift extrapolation operator and finite-grid convergence sweeps."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import DomainError, ValidationError
from .precision import (
    PrecisionPolicy,
    csv_decimal,
    decimal_string,
    exactify,
    parallel_map,
    resolve,
    to_fraction,
)
from .sampling import EpsilonFamily, FrequencyRow, regular_frequencies
from .trigpoly import TrigPoly, SuperoscillationLimit, bernstein_coefficients, lagrange_weights

GRID_LATTICE = 2**20
DEFAULT_THRESHOLD = 1e-3
DIVERGENCE_LEVEL = 1e3


class TargetKind(str, enum.Enum):
    ENTIRE = "EntireRestriction"
    GLUED = "Glued"
    WARPED = "Warped"
    ABS = "AbsVal"
    PERIODIC = "PeriodicSpectrum"


class Rule(str, enum.Enum):
    BERNSTEIN = "Bernstein"
    LAGRANGE = "Lagrange"


class Verdict(str, enum.Enum):
    CONVERGING = "Converging"
    DIVERGING = "Diverging"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)``; infinite ends allowed."""

    lo: float = -math.inf
    hi: float = math.inf

    def __contains__(self, t) -> bool:
        return (self.lo == -math.inf or t > self.lo) and (self.hi == math.inf or t < self.hi)

    def contains_closed(self, lo, hi) -> bool:
        """True iff the closed segment ``[lo, hi]`` lies inside the open interval."""
        return lo in self and hi in self

    def shifted(self, a0) -> "Interval":
        a0 = float(a0)
        return Interval(self.lo + a0, self.hi + a0)

    def reflected(self) -> "Interval":
        return Interval(-self.hi, -self.lo)


REAL_LINE = Interval()


@dataclass
class TargetFunction:
    """A sampled function ``psi`` with its open domain and provenance.

    ``sampler(t, ctx)`` returns ``psi(t)``; ``ctx`` is an mpmath context in
    float mode and ``None`` in exact mode, where ``t`` is a Fraction. Samplers
    that cannot run exactly (``exact_capable=False``) are evaluated in float
    mode and their value is converted to the exact dyadic rational it is.
    """

    sampler: Callable
    domain: Interval = REAL_LINE
    kind: TargetKind = TargetKind.ENTIRE
    name: str = "psi"
    exact_capable: bool = False
    _memo: Dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def sample(self, t, policy: Optional[PrecisionPolicy] = None, *, exact: bool = False):
        if exact:
            t = to_fraction(t)
            if t not in self.domain:
                raise DomainError(f"{self.name}: sample point {t} outside {self.domain}")
            key = ("q", t)
            if key not in self._memo:
                if self.exact_capable:
                    self._memo[key] = self.sampler(t, None)
                else:
                    policy = resolve(policy)
                    self._memo[key] = exactify(self.sampler(policy.lift(t), policy.ctx))
            return self._memo[key]
        policy = resolve(policy)
        t = policy.lift(t)
        if t not in self.domain:
            raise DomainError(f"{self.name}: sample point {t} outside {self.domain}")
        key = (policy.mantissa_bits, t._mpf_)
        value = self._memo.get(key)
        if value is None:
            value = self.sampler(t, policy.ctx)
            self._memo[key] = value
        return value

    def __call__(self, t, policy: Optional[PrecisionPolicy] = None, *, exact: bool = False):
        return self.sample(t, policy, exact=exact)


def translate(psi: TargetFunction, a0) -> TargetFunction:
    """``a -> psi(a - a0)`` on ``a0 + A``."""
    a0q = to_fraction(a0)

    def sampler(t, ctx):
        return psi.sampler(t - (a0q if ctx is None else ctx.mpf(a0q.numerator) / a0q.denominator), ctx)

    return TargetFunction(sampler, psi.domain.shifted(a0), psi.kind, f"{psi.name}(.-{a0})", psi.exact_capable)


def reflect(psi: TargetFunction) -> TargetFunction:
    """``a -> psi(-a)`` on ``-A``."""
    return TargetFunction(lambda t, ctx: psi.sampler(-t, ctx), psi.domain.reflected(), psi.kind,
                          f"{psi.name}(-.)", psi.exact_capable)


def snap(x) -> Fraction:
    """Nearest point of the ``2**-20`` lattice, so grid values are exact in binary."""
    return Fraction(round(to_fraction(x) * GRID_LATTICE), GRID_LATTICE)


def uniform_grid(lo, hi, step=Fraction(1, 4)) -> List[Fraction]:
    lo, hi, step = snap(lo), snap(hi), snap(step)
    if step <= 0:
        raise ValidationError("grid step must be positive")
    n = int((hi - lo) / step)
    return [lo + k * step for k in range(n + 1)]


@dataclass(frozen=True)
class ExtrapolationDomain:
    """Admissible ``(a, a')`` pairs: ``a' + [-1, 1]`` and ``a + a'`` inside ``A``."""

    A: Interval
    points: Tuple[Tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple((snap(a), snap(ap)) for a, ap in self.points))
        for a, ap in self.points:
            if not self.admissible(a, ap):
                raise DomainError(f"(a, a') = ({a}, {ap}) violates a'+[-1,1] in A, a+a' in A")

    def admissible(self, a, ap) -> bool:
        return self.A.contains_closed(ap - 1, ap + 1) and (a + ap) in self.A

    @classmethod
    def grid(cls, A: Interval, a_range, a_prime_range, step=Fraction(1, 4)) -> "ExtrapolationDomain":
        """Tensor grid of ``a`` and ``a'``, keeping only the admissible pairs."""
        pts = []
        for a in uniform_grid(*a_range, step):
            for ap in uniform_grid(*a_prime_range, step):
                if A.contains_closed(ap - 1, ap + 1) and (a + ap) in A:
                    pts.append((a, ap))
        return cls(A, tuple(pts))


def extrapolate(psi: TargetFunction, a, a_prime, row: FrequencyRow, coeffs: Sequence, *,
                exact: bool = False, policy: Optional[PrecisionPolicy] = None):
    """``sum_nu C_nu psi(a' + h_nu)``, summed in ascending ``nu``.

    ``a`` is not used by the sum itself; it is carried for the error messages
    and documents which parameter the coefficients were built for.
    """
    if len(coeffs) != len(row):
        raise ValidationError(f"{len(coeffs)} coefficients for {len(row)} frequencies")
    if exact:
        ap = to_fraction(a_prime)
        total = Fraction(0)
        for c, h in zip(coeffs, row.values):
            total = total + c * psi.sample(ap + to_fraction(h), exact=True)
        return total
    policy = resolve(policy)
    ap = policy.lift(a_prime)
    total = policy.ctx.mpf(0)
    for c, h in zip(coeffs, row.values):
        total += policy.lift(c) * policy.lift(psi.sample(ap + policy.lift(h), policy))
    return total


# -- reports -----------------------------------------------------------------


CSV_COLUMNS = ("rule", "iota", "N", "a", "a_prime", "abs_error")


@dataclass
class ConvergenceReport:
    per_N: Dict[int, object]
    per_family_member: Dict[int, Dict[int, object]]
    uniform_sup: Dict[int, object]
    verdict: Verdict
    rule: str = "Bernstein"
    records: List[Tuple] = field(default_factory=list, repr=False)
    threshold: float = DEFAULT_THRESHOLD

    def to_csv(self, bits: int = 256) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rule, iota, N, a, ap, err in self.records:
            w.writerow([rule, iota, N, csv_decimal(a, bits), csv_decimal(ap, bits), csv_decimal(err, bits)])
        return buf.getvalue()

    def summary(self, bits: int = 256) -> dict:
        return {
            "rule": self.rule,
            "verdict": self.verdict.value,
            "threshold": self.threshold,
            "per_N": {str(N): float(v) for N, v in self.per_N.items()},
            "uniform_sup": {str(N): float(v) for N, v in self.uniform_sup.items()},
            "uniform_sup_decimal": {str(N): decimal_string(v, bits) for N, v in self.uniform_sup.items()},
            "per_family_member": {
                str(i): {str(N): float(v) for N, v in d.items()} for i, d in self.per_family_member.items()
            },
        }


def judge(sup_by_N: Mapping[int, object], threshold=DEFAULT_THRESHOLD,
          divergence_level=DIVERGENCE_LEVEL) -> Verdict:
    """Verdict from the sup errors over an increasing ``N`` list.

    Converging: non-increasing over the last three ``N`` and the last value
    below ``threshold``. Diverging: strictly increasing over the last three
    and the maximum above ``divergence_level``. Anything else is Inconclusive.
    """
    vals = [sup_by_N[N] for N in sorted(sup_by_N)]
    tail = vals[-3:]
    if all(b <= a for a, b in zip(tail, tail[1:])) and tail[-1] < threshold:
        return Verdict.CONVERGING
    if all(b > a for a, b in zip(tail, tail[1:])) and max(vals) > divergence_level:
        return Verdict.DIVERGING
    return Verdict.INCONCLUSIVE


def _check_increasing(N_list: Sequence[int]) -> List[int]:
    Ns = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError("N_list must be strictly increasing")
    return Ns


def tcsp_sweep(psi: TargetFunction, dom: ExtrapolationDomain, N_list: Sequence[int], family: EpsilonFamily,
               rule=Rule.BERNSTEIN, *, threshold=DEFAULT_THRESHOLD, policy: Optional[PrecisionPolicy] = None,
               threads: Optional[int] = 1) -> ConvergenceReport:
    """Sup-grid error of the translated extrapolation for every family member and ``N``.

    For each member ``iota`` and each ``N`` the regular row with ``eps_{iota,N}``
    is built, the amplitudes of ``rule`` are formed at every grid ``a`` and
    ``|sum_nu C_nu(N, a) psi(a' + h_nu) - psi(a + a')|`` is measured. Grid
    points are evaluated in parallel; results land in pre-indexed slots so the
    report does not depend on ``threads``.
    """
    policy = resolve(policy)
    rule = Rule(rule)
    Ns = _check_increasing(N_list)
    per_member: Dict[int, Dict[int, object]] = {}
    records: List[Tuple] = []
    a_values = sorted({a for a, _ in dom.points})
    for iota, member in enumerate(family.members):
        per_member[iota] = {}
        for N in Ns:
            row = regular_frequencies(N, member.at(N), policy=policy)
            if rule is Rule.BERNSTEIN:
                coeff_list = parallel_map(lambda a: bernstein_coefficients(N, a, policy=policy), a_values, threads)
            else:
                coeff_list = parallel_map(lambda a: lagrange_weights(row, a, policy=policy), a_values, threads)
            coeffs = dict(zip(a_values, coeff_list))

            def point_error(pt, row=row, coeffs=coeffs):
                a, ap = pt
                value = extrapolate(psi, a, ap, row, coeffs[a], policy=policy)
                return abs(value - policy.lift(psi.sample(policy.lift(a + ap), policy)))

            errors = parallel_map(point_error, dom.points, threads)
            per_member[iota][N] = max(errors)
            records.extend((rule.value, iota, N, a, ap, e) for (a, ap), e in zip(dom.points, errors))
    uniform = {N: max(per_member[i][N] for i in per_member) for N in Ns}
    per_N = per_member[0] if len(per_member) == 1 else uniform
    return ConvergenceReport(per_N, per_member, uniform, judge(uniform, threshold), rule.value, records, threshold)


def superoscillation_check(seq_builder: Callable[[int, object], TrigPoly], limit: SuperoscillationLimit,
                           x_grid: Sequence, lambda_grid: Sequence, N_list: Sequence[int], *,
                           threshold=DEFAULT_THRESHOLD, policy: Optional[PrecisionPolicy] = None,
                           threads: Optional[int] = 1, rule: str = "superosc") -> ConvergenceReport:
    """Sup over the grid of ``|T_N[lam](x) - C(lam) exp(i g(lam) x)|`` for each ``N``.

    ``seq_builder(N, lam)`` returns the trigonometric polynomial ``T_N[lam]``.
    """
    policy = resolve(policy)
    Ns = _check_increasing(N_list)
    limit.check(lambda_grid, policy)
    per_N: Dict[int, object] = {}
    records: List[Tuple] = []
    for N in Ns:
        polys = {lam: seq_builder(N, lam) for lam in lambda_grid}
        tasks = [(lam, x) for lam in lambda_grid for x in x_grid]

        def err(task, polys=polys):
            lam, x = task
            return abs(polys[lam](x, policy) - limit.target(lam, x, policy))

        errors = parallel_map(err, tasks, threads)
        per_N[N] = max(errors)
        records.extend((rule, 0, N, lam, x, e) for (lam, x), e in zip(tasks, errors))
    return ConvergenceReport(per_N, {0: dict(per_N)}, dict(per_N), judge(per_N, threshold), rule, records, threshold)


def reflection_residual(psi: TargetFunction, a, a_prime, N: int, eps_N, policy: Optional[PrecisionPolicy] = None):
    """Relative gap between the two sides of the reflection identity.

    Left: the Bernstein extrapolation of ``psi(-.)`` at ``(a, a')``. Right: the
    same sum with reversed coefficients and nodes shifted by ``2 eps_N``,
    applied to ``psi`` at ``-a'``.
    """
    policy = resolve(policy)
    row = regular_frequencies(N, eps_N, policy=policy)
    coeffs = bernstein_coefficients(N, a, policy=policy)
    lhs = extrapolate(reflect(psi), a, a_prime, row, coeffs, policy=policy)
    ap = -policy.lift(a_prime) + 2 * policy.lift(eps_N)
    rhs = extrapolate(psi, -policy.lift(a), ap, row, coeffs[::-1], policy=policy)
    scale = max(abs(lhs), abs(rhs), policy.ctx.mpf(1))
    return abs(lhs - rhs) / scale
