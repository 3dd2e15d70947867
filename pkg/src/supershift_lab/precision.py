"""Working precision, exact rationals and deterministic parallel helpers.

Two arithmetic modes coexist in the package:

* float mode: mpmath numbers at a fixed mantissa width chosen by a
  :class:`PrecisionPolicy`;
* exact mode: :class:`fractions.Fraction` for real values and
  :class:`GaussianRational` for complex ones.

Every numerical routine is written against ``+ - * /`` only, so the same code
path serves both modes.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import mpmath
from mpmath.libmp import from_rational, to_str

from .errors import PrecisionError

T = TypeVar("T")
R = TypeVar("R")

GUARD_FLOOR_BITS = 113
GUARD_EXTRA_BITS = 64
DEFAULT_BITS = 256

_local = threading.local()


def mp_context(bits: int) -> mpmath.MPContext:
    """Return a per-thread mpmath context fixed at ``bits`` of mantissa.

    Contexts are never shared between threads, so no code path can observe
    another thread changing the working precision.
    """
    cache = _local.__dict__.setdefault("contexts", {})
    ctx = cache.get(bits)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.prec = bits
        cache[bits] = ctx
    return ctx


def guard_bits(N: int, a) -> int:
    """Mantissa bits needed for an order-``N`` Bernstein sum at parameter ``a``.

    The amplitudes reach ``((1+|a|)/2)**N`` in size with alternating signs and
    cancel to O(1); 64 bits on top of the cancellation keep the result sound.
    """
    mag = abs(float(a))
    return max(GUARD_FLOOR_BITS, math.ceil(N * math.log2(1.0 + mag)) + GUARD_EXTRA_BITS)


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(Fraction(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.abs2()
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = GaussianRational(Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational))


def to_fraction(x) -> Fraction:
    """Exact rational value of a real number (mpf values are dyadic)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, mpmath.mpf) or hasattr(x, "_mpf_"):
        if not mpmath.isfinite(x):
            raise ValueError(f"cannot convert non-finite value {x!r} to Fraction")
        sign, man, exp, _ = x._mpf_  # man_exp drops the sign
        man = -int(man) if sign else int(man)
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def exactify(x):
    """Exact counterpart of a real or complex value (Fraction or GaussianRational)."""
    if isinstance(x, (Fraction, int, GaussianRational)):
        return Fraction(x) if isinstance(x, int) else x
    if isinstance(x, complex) or hasattr(x, "_mpc_"):
        re, im = to_fraction(x.real), to_fraction(x.imag)
        return re if im == 0 else GaussianRational(re, im)
    return to_fraction(x)


@dataclass(frozen=True)
class PrecisionPolicy:
    """Mantissa width and summation order for float-mode evaluation.

    Parameters
    ----------
    mantissa_bits : int
        Binary precision of every mpmath operation, at least 64.
    summation_order : str
        Only ``"ascending"`` (fixed ascending index) is supported.
    """

    mantissa_bits: int = DEFAULT_BITS
    summation_order: str = "ascending"

    def __post_init__(self) -> None:
        if int(self.mantissa_bits) < 64:
            raise ValueError("mantissa_bits must be at least 64")
        if self.summation_order != "ascending":
            raise ValueError("only ascending summation order is supported")

    @property
    def ctx(self) -> mpmath.MPContext:
        return mp_context(self.mantissa_bits)

    @property
    def half_tolerance(self):
        """``2**(-(precision/2))``, the relative agreement used by identity checks."""
        return self.ctx.ldexp(1, -(self.mantissa_bits // 2))

    @property
    def merge_tolerance(self):
        """``2**(-(precision-8))``, below which two frequencies count as one."""
        return self.ctx.ldexp(1, -(self.mantissa_bits - 8))

    def require(self, N: int, a) -> None:
        """Raise :class:`PrecisionError` if the guard rule exceeds this policy."""
        need = guard_bits(N, a)
        if need > self.mantissa_bits:
            raise PrecisionError(
                f"N={N}, |a|={abs(float(a)):g} needs {need} bits, policy allows {self.mantissa_bits}"
            )

    def lift(self, x):
        """Convert any supported scalar to an mpmath number of this policy."""
        ctx = self.ctx
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, Fraction):
            return ctx.make_mpf(from_rational(x.numerator, x.denominator, ctx.prec, "n"))
        if isinstance(x, GaussianRational):
            return ctx.mpc(self.lift(x.re), self.lift(x.im))
        if isinstance(x, str):
            s = x.strip()
            if "/" in s:
                return self.lift(Fraction(s))
            return ctx.mpf(s)
        if isinstance(x, complex) or hasattr(x, "_mpc_"):
            return ctx.mpc(x)
        return ctx.mpf(x)


DEFAULT_POLICY = PrecisionPolicy()


def resolve(policy: Optional[PrecisionPolicy]) -> PrecisionPolicy:
    return DEFAULT_POLICY if policy is None else policy


def magnitude(x, policy: Optional[PrecisionPolicy] = None):
    """Absolute value as an mpf, whatever the arithmetic mode of ``x``."""
    policy = resolve(policy)
    if isinstance(x, GaussianRational):
        return policy.ctx.sqrt(policy.lift(x.abs2()))
    if isinstance(x, (int, Fraction)):
        return policy.lift(abs(Fraction(x)))
    return abs(policy.lift(x))


def decimal_digits(bits: int) -> int:
    """Significant decimal digits that round-trip a ``bits``-bit mantissa."""
    return int(math.ceil(bits * math.log10(2))) + 2


def decimal_string(x, bits: int = DEFAULT_BITS) -> str:
    """Full-precision text for a real scalar (Fractions stay exact as ``p/q``)."""
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    if hasattr(x, "_mpf_"):
        return to_str(x._mpf_, decimal_digits(bits))
    return to_str(mp_context(bits).mpf(x)._mpf_, decimal_digits(bits))


def real_imag_strings(x, bits: int = DEFAULT_BITS):
    """``(real, imag)`` decimal strings of a scalar of either mode."""
    if isinstance(x, GaussianRational):
        return decimal_string(x.re, bits), decimal_string(x.im, bits)
    if isinstance(x, complex) or hasattr(x, "_mpc_"):
        return decimal_string(x.real, bits), decimal_string(x.imag, bits)
    return decimal_string(x, bits), "0"


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = 1) -> List[R]:
    """Apply ``fn`` to ``items``; results land in input order whatever ``threads`` is."""
    items = list(items)
    n = default_threads() if threads is None else int(threads)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def ascending_sum(terms: Sequence, zero=0):
    """Left-to-right sum in index order; no reordering or compensation."""
    total = zero
    for t in terms:
        total = total + t
    return total


def csv_decimal(x, bits: int = DEFAULT_BITS) -> str:
    """Decimal text for CSV cells; exact rationals are rounded to ``bits`` first."""
    if isinstance(x, (int, Fraction)):
        x = PrecisionPolicy(max(bits, 64)).lift(Fraction(x))
    return decimal_string(x, bits)


def csv_real_imag(x, bits: int = DEFAULT_BITS):
    """``(real, imag)`` decimal cells for a scalar of either mode."""
    if isinstance(x, GaussianRational):
        return csv_decimal(x.re, bits), csv_decimal(x.im, bits)
    if isinstance(x, complex) or hasattr(x, "_mpc_"):
        return decimal_string(x.real, bits), decimal_string(x.imag, bits)
    return csv_decimal(x, bits), "0.0"
