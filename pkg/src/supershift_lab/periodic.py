"""Periodic targets: finite Fourier spectra, autocorrelation, the Bernstein
multiplier of a single mode and an exponential-decay certificate.

For ``psi(a) = sum gamma_k e^{2 pi i k a / T}`` the Bernstein extrapolation at
parameter ``R`` of the mode ``k`` over the nodes ``1 - 2 nu/N`` is the mode
itself times ``(cos w + i R sin w)**N`` with ``w = 2 pi k / (T N)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import DomainError, ValidationError
from .precision import PrecisionPolicy, csv_decimal, parallel_map, resolve
from .trigpoly import bernstein_coefficients

DEFAULT_CHI = 4
QUADRATURE_NODES = 2**14


@dataclass(frozen=True)
class FourierSpectrum:
    """Finitely supported spectrum ``k -> gamma_k`` of a ``T``-periodic function."""

    T: object
    coefficients: Mapping[int, object]

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise DomainError("period T must be positive")
        object.__setattr__(self, "coefficients", {int(k): v for k, v in sorted(self.coefficients.items())})

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, v in self.coefficients.items() if v != 0)

    @property
    def K(self) -> int:
        return max((abs(k) for k in self.coefficients), default=0)

    def gamma(self, k: int):
        return self.coefficients.get(k, 0)

    def __call__(self, a, policy: Optional[PrecisionPolicy] = None):
        """``sum gamma_k e^{2 pi i k a / T}`` by Horner in ``e^{+-2 pi i a / T}``."""
        policy = resolve(policy)
        ctx = policy.ctx
        if not self.coefficients:
            return ctx.mpc(0)
        return self._horner(ctx.expj(2 * ctx.pi * policy.lift(a) / policy.lift(self.T)), self._lifted(policy), ctx)

    def _lifted(self, policy: PrecisionPolicy):
        K = self.K
        pos = [policy.lift(self.coefficients.get(k, 0)) for k in range(K, -1, -1)]
        neg = [policy.lift(self.coefficients.get(-k, 0)) for k in range(K, 0, -1)]
        return pos, neg

    @staticmethod
    def _horner(base, lifted, ctx):
        pos_c, neg_c = lifted
        pos = ctx.mpc(0)
        for c in pos_c:
            pos = pos * base + c
        inv = 1 / base
        neg = ctx.mpc(0)
        for c in neg_c:
            neg = (neg + c) * inv
        return pos + neg


def exp_spectrum(K: int, T=None, rate=1, policy: Optional[PrecisionPolicy] = None) -> FourierSpectrum:
    """``gamma_k = e^{-rate |k|}`` for ``|k| <= K``."""
    policy = resolve(policy)
    ctx = policy.ctx
    T = 2 * ctx.pi if T is None else policy.lift(T)
    return FourierSpectrum(T, {k: ctx.exp(-policy.lift(rate) * abs(k)) for k in range(-K, K + 1)})


def rational_spectrum(K: int, T=None, policy: Optional[PrecisionPolicy] = None) -> FourierSpectrum:
    """``gamma_k = 1/(1 + k**2)`` for ``|k| <= K``: only polynomial decay."""
    policy = resolve(policy)
    T = 2 * policy.ctx.pi if T is None else policy.lift(T)
    return FourierSpectrum(T, {k: policy.lift(1) / (1 + k * k) for k in range(-K, K + 1)})


def autocorrelate(s: FourierSpectrum) -> FourierSpectrum:
    """Spectrum ``gamma_k**2`` of ``(1/T) int_0^T psi(a - t) psi(t) dt``."""
    return FourierSpectrum(s.T, {k: g * g for k, g in s.coefficients.items() if g != 0})


def autocorrelation_quadrature(s: FourierSpectrum, a, nodes: int = QUADRATURE_NODES,
                               policy: Optional[PrecisionPolicy] = None):
    """Trapezoid value of ``(1/T) int_0^T psi(a - t) psi(t) dt`` on ``nodes`` points.

    Exact for trigonometric integrands whose frequencies stay below ``nodes``.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    shift = ctx.expj(2 * ctx.pi * policy.lift(a) / policy.lift(s.T))
    lifted = s._lifted(policy)
    total = ctx.mpc(0)
    for j in range(nodes):
        e = ctx.expj(2 * ctx.pi * j / nodes)
        total += s._horner(shift * ctx.conj(e), lifted, ctx) * s._horner(e, lifted, ctx)
    return total / nodes


def multiplier(N: int, R, kappa: int, T, policy: Optional[PrecisionPolicy] = None):
    """``(cos w + i R sin w)**N`` with ``w = 2 pi kappa / (T N)``."""
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    policy = resolve(policy)
    ctx = policy.ctx
    if kappa == 0:
        return ctx.mpc(1)
    w = 2 * ctx.pi * kappa / (policy.lift(T) * N)
    return ctx.mpc(ctx.cos(w), policy.lift(R) * ctx.sin(w)) ** N


def multiplier_identity_check(s: FourierSpectrum, R, a_prime_grid: Sequence, N: int,
                              policy: Optional[PrecisionPolicy] = None) -> Tuple[object, object]:
    """Max gap between the two sides of the multiplier identity over ``a_prime_grid``.

    Left: ``sum_nu binom(N,nu) ((1+R)/2)**(N-nu) ((1-R)/2)**nu psi~(a' + 1 - 2 nu/N)``
    with ``psi~`` the autocorrelation. Right: ``sum_k gamma_k**2 multiplier(N, R, k, T) e^{2 pi i k a'/T}``.
    Returns ``(residual, scale)`` where ``scale`` is the largest left-hand term.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    auto = autocorrelate(s)
    coeffs = bernstein_coefficients(N, R, policy=policy)
    T = policy.lift(s.T)
    mults = {k: multiplier(N, R, k, T, policy) for k in auto.coefficients}
    worst, scale = ctx.mpf(0), ctx.mpf(0)
    for ap in a_prime_grid:
        ap = policy.lift(ap)
        lhs = ctx.mpc(0)
        for nu, c in enumerate(coeffs):
            term = c * auto(ap + 1 - policy.lift(2 * nu) / N, policy)
            scale = max(scale, abs(term))
            lhs += term
        base = ctx.expj(2 * ctx.pi * ap / T)
        rhs = ctx.mpc(0)
        for k, g in auto.coefficients.items():
            rhs += policy.lift(g) * mults[k] * base**k
        worst = max(worst, abs(lhs - rhs))
    return worst, scale


# -- decay certificate -------------------------------------------------------


def rate(R, T, M: int, policy: Optional[PrecisionPolicy] = None):
    """``(2 pi**2 / T**2) (R**2 - 1) / (4 M)``, the exponential rate implied at ``R``."""
    policy = resolve(policy)
    ctx = policy.ctx
    R, T = policy.lift(R), policy.lift(T)
    return 2 * ctx.pi**2 / T**2 * (R * R - 1) / (4 * M)


def check_chi(R, T, M: int, N_list: Sequence[int], kappas: Sequence[int],
              policy: Optional[PrecisionPolicy] = None) -> None:
    """Raise unless ``log|cos w + i R sin w| >= (R**2-1) w**2 / 4`` for every ``w = 2 pi k/(T M N)`` used."""
    policy = resolve(policy)
    ctx = policy.ctx
    R, T = policy.lift(R), policy.lift(T)
    for N in N_list:
        for k in kappas:
            if k == 0:
                continue
            w = 2 * ctx.pi * k / (T * M * N)
            lhs = ctx.log(ctx.cos(w) ** 2 + (R * ctx.sin(w)) ** 2) / 2
            if lhs < (R * R - 1) * w * w / 4:
                raise ValidationError(f"chi too small: R={R}, M={M}, N={N}, kappa={k}")


@dataclass
class RadiusRecord:
    R: object
    M: int
    rate: object
    C: object
    plancherel: Dict[int, object]
    boundary: Dict[int, object]
    certified: bool


@dataclass
class DecayCertificate:
    """Per-``R`` Plancherel sums and the largest certified decay rate."""

    T: object
    records: List[RadiusRecord]
    rows: List[Tuple] = field(default_factory=list, repr=False)

    @property
    def implied_Rprime(self):
        rates = [r.rate for r in self.records if r.certified]
        return max(rates) if rates else 0

    def gamma_bound(self, kappa: int, policy: Optional[PrecisionPolicy] = None):
        """``C**(1/4) e^{-R' |kappa|}`` from the best certified radius (``inf`` when none)."""
        policy = resolve(policy)
        ctx = policy.ctx
        best = [r for r in self.records if r.certified]
        if not best:
            return ctx.inf
        r = max(best, key=lambda rec: rec.rate)
        return ctx.root(r.C, 4) * ctx.exp(-r.rate * abs(kappa))

    def to_csv(self, bits: int = 256) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("R", "N", "kappa", "multiplier_abs", "gamma_bound", "implied_Rprime"))
        for row in self.rows:
            R, N, k, m, g, rp = row
            w.writerow((csv_decimal(R, bits), N, k, csv_decimal(m, bits), csv_decimal(g, bits),
                        csv_decimal(rp, bits)))
        return buf.getvalue()


def decay_certificate(s: FourierSpectrum, R_list: Sequence, N_list: Sequence[int], chi=DEFAULT_CHI,
                      policy: Optional[PrecisionPolicy] = None, threads: Optional[int] = 1) -> DecayCertificate:
    """Exponential-decay evidence for the Fourier coefficients of ``s``.

    For each ``R > 1`` with ``M = floor(chi R)`` the Plancherel sums
    ``S(N) = sum_{|k|<=N} |gamma_k|**4 |multiplier(M N, R, k, T)|**2`` are formed;
    ``C(R) = max_N S(N)``. The radius is certified when the boundary terms
    ``k = +-N`` are non-increasing over the last three ``N``, so that ``S``
    shows no sign of blowing up. A certified ``R`` gives
    ``|gamma_k| <= C**(1/4) exp(-rate(R) |k|)``.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    Ns = [int(N) for N in N_list]
    if len(Ns) < 3 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError("N_list must be strictly increasing with at least three entries")
    T = policy.lift(s.T)
    quartic = {k: abs(policy.lift(g)) ** 4 for k, g in s.coefficients.items()}

    def one(R) -> RadiusRecord:
        Rm = policy.lift(R)
        if not Rm > 1:
            raise DomainError(f"R must exceed 1, got {R}")
        M = max(1, int(ctx.floor(chi * Rm)))
        check_chi(Rm, T, M, Ns, [k for k in range(-Ns[-1], Ns[-1] + 1)], policy)
        S, B = {}, {}
        for N in Ns:
            total = ctx.mpf(0)
            for k in range(-N, N + 1):
                q = quartic.get(k)
                if q:
                    total += q * abs(multiplier(M * N, Rm, k, T, policy)) ** 2
            S[N] = total
            B[N] = sum((quartic.get(k, 0) * abs(multiplier(M * N, Rm, k, T, policy)) ** 2 for k in (-N, N)),
                       ctx.mpf(0))
        tail = [B[N] for N in Ns[-3:]]
        ok = all(b <= a for a, b in zip(tail, tail[1:]))
        return RadiusRecord(Rm, M, rate(Rm, T, M, policy), max(S.values()), S, B, ok)

    records = parallel_map(one, list(R_list), threads)
    cert = DecayCertificate(T, records)
    for rec in records:
        rp = rec.rate if rec.certified else ctx.mpf(0)
        for N in Ns:
            for k in (-N, N):
                g = ctx.root(rec.C, 4) * ctx.exp(-rec.rate * abs(k)) if rec.certified else ctx.inf
                cert.rows.append((rec.R, N, k, abs(multiplier(rec.M * N, rec.R, k, T, policy)), g, rp))
    return cert
