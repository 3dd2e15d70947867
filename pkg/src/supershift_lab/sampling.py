"""Frequency samplings of [-1, 1]: regular, almost-regular (Minkowski) and irregular."""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import DomainError, SizeError, ValidationError
from .precision import PrecisionPolicy, decimal_string, is_exact, resolve, to_fraction

MINKOWSKI_CAP = 20


class SamplingKind(str, enum.Enum):
    REGULAR = "Regular"
    ALMOST_REGULAR = "AlmostRegular"
    IRREGULAR = "Irregular"


@dataclass(frozen=True)
class FrequencyRow:
    """Row ``N`` of a sampling matrix: non-increasing frequencies in [-1, 1]."""

    N: int
    values: Tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if int(self.N) < 1:
            raise ValidationError(f"row index must be positive, got {self.N}")
        if len(self.values) < 2:
            raise ValidationError("a row needs at least two frequencies (nu(N) >= 1)")
        for v in self.values:
            if v > 1 or v < -1:
                raise ValidationError(f"row {self.N}: frequency {v} outside [-1, 1]")
        for v, w in zip(self.values, self.values[1:]):
            if w > v:
                raise ValidationError(f"row {self.N}: frequencies must be non-increasing")

    @property
    def nu(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def gaps(self) -> List:
        return [v - w for v, w in zip(self.values, self.values[1:])]

    def to_dict(self, bits: int = 256) -> dict:
        return {"N": self.N, "values": [decimal_string(v, bits) for v in self.values]}


@dataclass(frozen=True)
class FrequencyMatrix:
    rows: Tuple[FrequencyRow, ...]
    kind: SamplingKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "kind", SamplingKind(self.kind))

    def row(self, N: int) -> FrequencyRow:
        for r in self.rows:
            if r.N == N:
                return r
        raise KeyError(N)

    def to_json(self, bits: int = 256) -> str:
        return json.dumps({"kind": self.kind.value, "rows": [r.to_dict(bits) for r in self.rows]})

    @classmethod
    def from_json(cls, text: str, policy: Optional[PrecisionPolicy] = None) -> "FrequencyMatrix":
        """Parse the JSON form; ``p/q`` strings stay exact, decimals become mpf."""
        policy = resolve(policy)
        data = json.loads(text)
        rows = []
        for r in data["rows"]:
            vals = [Fraction(s) if "/" in s or _is_integer_string(s) else policy.lift(s) for s in r["values"]]
            rows.append(FrequencyRow(int(r["N"]), tuple(vals)))
        return cls(tuple(rows), SamplingKind(data["kind"]))


def _is_integer_string(s: str) -> bool:
    return s.lstrip("+-").isdigit()


# -- epsilon sequences -------------------------------------------------------


@dataclass(frozen=True)
class EpsilonSequence:
    """Finite truncation ``N -> eps_N`` of a sequence in [0, 1) tending to 0."""

    values: Mapping[int, object]
    description: str = "custom"

    def __post_init__(self) -> None:
        vals = dict(sorted(self.values.items()))
        object.__setattr__(self, "values", vals)
        for N, e in vals.items():
            if not (0 <= e < 1):
                raise DomainError(f"eps_{N} = {e} not in [0, 1)")
        seq = list(vals.values())
        if any(b > a for a, b in zip(seq, seq[1:])):
            raise DomainError(f"{self.description}: eps_N must be non-increasing on the tested range")

    def at(self, N: int):
        try:
            return self.values[N]
        except KeyError:
            raise DomainError(f"{self.description}: eps_{N} not generated") from None


def zero_eps(Ns: Iterable[int]) -> EpsilonSequence:
    return EpsilonSequence({int(N): Fraction(0) for N in Ns}, "0")


def power_eps(c, Ns: Iterable[int], p: int = 1) -> EpsilonSequence:
    """``eps_N = c / N**p``; rational ``c`` keeps the values exact."""
    c = to_fraction(c)
    return EpsilonSequence({int(N): c / Fraction(N) ** p for N in Ns}, f"{c}/N^{p}")


def log_eps(c, Ns: Iterable[int], policy: Optional[PrecisionPolicy] = None) -> EpsilonSequence:
    """``eps_N = c / log(N + 1)`` at policy precision."""
    policy = resolve(policy)
    ctx = policy.ctx
    c = policy.lift(c)
    return EpsilonSequence({int(N): c / ctx.log(N + 1) for N in Ns}, f"{c}/log(N+1)")


@dataclass(frozen=True)
class EpsilonFamily:
    """Family of epsilon sequences tending to 0 uniformly in the member index."""

    members: Tuple[EpsilonSequence, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValidationError("an epsilon family needs at least one member")
        ub = list(self.uniform_bound.values())
        if any(b > a for a, b in zip(ub, ub[1:])):
            raise DomainError("uniform bound of the family is not non-increasing")

    @property
    def uniform_bound(self) -> Dict[int, object]:
        Ns = sorted(set().union(*(m.values.keys() for m in self.members)))
        return {N: max(m.values[N] for m in self.members if N in m.values) for N in Ns}


# -- Xi collections ----------------------------------------------------------


@dataclass(frozen=True)
class XiCollection:
    """Parameters ``xi[(N, k)]`` in [0, 1] of an almost-regular sampling."""

    xi: Mapping[Tuple[int, int], object]

    def __post_init__(self) -> None:
        for key, v in self.xi.items():
            if not (0 <= v <= 1):
                raise DomainError(f"xi{key} = {v} not in [0, 1]")

    def row(self, N: int) -> Tuple:
        return tuple(self.xi[(N, k)] for k in range(1, N + 1))


def random_xi(Ns: Iterable[int], seed: int = 0) -> XiCollection:
    """Uniform draws on a 2**-30 lattice in [0, 1] (exactly representable)."""
    rng = random.Random(seed)
    xi = {}
    for N in Ns:
        for k in range(1, N + 1):
            xi[(N, k)] = Fraction(rng.randrange(0, 2**30 + 1), 2**30)
    return XiCollection(xi)


# -- constructions -----------------------------------------------------------


def _check_eps(eps) -> None:
    if not (0 <= eps < 1):
        raise DomainError(f"eps_N = {eps} not in [0, 1)")


def regular_frequencies(
    N: int, eps_N=0, *, exact: bool = False, policy: Optional[PrecisionPolicy] = None
) -> FrequencyRow:
    """Regular sampling row ``h_nu = 1 - 2 (nu + eps_N (N - nu)) / N``, ``nu = 0..N``.

    Parameters
    ----------
    N : int
        Row index, at least 1.
    eps_N : real
        Offset in [0, 1).
    exact : bool
        Return Fractions instead of mpf values.
    """
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if exact:
        eps = to_fraction(eps_N)
        _check_eps(eps)
        vals = tuple(1 - Fraction(2 * (nu + eps * (N - nu))) / N for nu in range(N + 1))
    else:
        policy = resolve(policy)
        eps = policy.lift(eps_N)
        _check_eps(eps)
        vals = tuple(1 - 2 * (nu + eps * (N - nu)) / N for nu in range(N + 1))
    return FrequencyRow(N, vals)


def minkowski_points(
    N: int,
    xi_row: Sequence,
    plus_weight=None,
    minus_weight=None,
    *,
    exact: bool = False,
    policy: Optional[PrecisionPolicy] = None,
    cap: int = MINKOWSKI_CAP,
) -> List[Tuple[object, object]]:
    """Expand the Minkowski sum of ``{±(1/N)(1 - xi_k/N)}`` with optional weights.

    Each point carries the product of the weights of the signs that produced
    it; merged points have their weights summed. Returned in decreasing order
    of the point value.
    """
    if int(N) < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > cap:
        raise SizeError(f"explicit Minkowski expansion capped at N={cap}, got {N}")
    if len(xi_row) != N:
        raise ValidationError(f"need {N} xi values, got {len(xi_row)}")
    if exact:
        xs = [to_fraction(x) for x in xi_row]
        one = Fraction(1)
        tol = None
    else:
        policy = resolve(policy)
        xs = [policy.lift(x) for x in xi_row]
        one = policy.lift(1)
        tol = policy.merge_tolerance * N * N
    for x in xs:
        if not (0 <= x <= 1):
            raise DomainError(f"xi = {x} not in [0, 1]")
    wp = one if plus_weight is None else plus_weight
    wm = one if minus_weight is None else minus_weight

    # accumulate U = sum ±(N - xi_k); the point is U / N**2, so |U| <= N**2 stays exact at the ends
    points = [(0 * one, one)]
    for x in xs:
        step = N - x
        expanded = []
        for u, w in points:
            expanded.append((u + step, w * wp))
            expanded.append((u - step, w * wm))
        points = _merge(expanded, tol)
    scale = N * N
    return [(u / scale, w) for u, w in points]


def _merge(points: List[Tuple[object, object]], tol) -> List[Tuple[object, object]]:
    points.sort(key=lambda p: p[0], reverse=True)
    merged: List[List[object]] = []
    for u, w in points:
        if merged and (u == merged[-1][0] if tol is None else merged[-1][0] - u <= tol):
            merged[-1][1] = merged[-1][1] + w
        else:
            merged.append([u, w])
    return [(u, w) for u, w in merged]


def minkowski_frequencies(
    N: int,
    xi_row: Sequence,
    *,
    exact: bool = False,
    policy: Optional[PrecisionPolicy] = None,
    cap: int = MINKOWSKI_CAP,
) -> FrequencyRow:
    """Almost-regular row: the de-duplicated Minkowski sum, sorted non-increasing."""
    pts = minkowski_points(N, xi_row, exact=exact, policy=policy, cap=cap)
    return FrequencyRow(N, tuple(u for u, _ in pts))


def regular_matrix(Ns: Iterable[int], eps: EpsilonSequence, *, exact: bool = False,
                   policy: Optional[PrecisionPolicy] = None) -> FrequencyMatrix:
    rows = tuple(regular_frequencies(N, eps.at(N), exact=exact, policy=policy) for N in Ns)
    return FrequencyMatrix(rows, SamplingKind.REGULAR)


def almost_regular_matrix(Ns: Iterable[int], xi: XiCollection, *, exact: bool = False,
                          policy: Optional[PrecisionPolicy] = None) -> FrequencyMatrix:
    rows = tuple(minkowski_frequencies(N, xi.row(N), exact=exact, policy=policy) for N in Ns)
    return FrequencyMatrix(rows, SamplingKind.ALMOST_REGULAR)


def irregular_row(N: int, seed: int = 0) -> FrequencyRow:
    """Random distinct nodes in [-1, 1] with both endpoints, on a 2**-30 lattice."""
    rng = random.Random(seed)
    inner = set()
    while len(inner) < N - 1:
        inner.add(Fraction(rng.randrange(-(2**30) + 1, 2**30), 2**30))
    return FrequencyRow(N, tuple([Fraction(1)] + sorted(inner, reverse=True) + [Fraction(-1)]))


def matrix_from_rows(rows: Iterable[FrequencyRow], policy: Optional[PrecisionPolicy] = None) -> FrequencyMatrix:
    rows = tuple(rows)
    return FrequencyMatrix(rows, classify_rows(rows, None, policy))


# -- classification ----------------------------------------------------------


def _close(x, y, tol) -> bool:
    return x == y if tol is None else abs(x - y) <= tol


def _row_tolerance(row: FrequencyRow, policy: PrecisionPolicy):
    return None if all(is_exact(v) for v in row.values) else policy.merge_tolerance


def matches_regular(row: FrequencyRow, policy: Optional[PrecisionPolicy] = None) -> bool:
    """True iff the row equals a regular row for some eps_N in [0, 1)."""
    policy = resolve(policy)
    if row.nu != row.N:
        return False
    tol = _row_tolerance(row, policy)
    N = row.N
    eps = (1 - row.values[0]) / 2
    if not (0 <= eps < 1):
        return False
    return all(_close(h, 1 - 2 * (nu + eps * (N - nu)) / N, tol) for nu, h in enumerate(row.values))


def has_constant_gaps(row: FrequencyRow, policy: Optional[PrecisionPolicy] = None) -> bool:
    policy = resolve(policy)
    tol = _row_tolerance(row, policy)
    g = row.gaps()
    return all(_close(x, g[0], tol) for x in g)


def is_symmetric(row: FrequencyRow, policy: Optional[PrecisionPolicy] = None) -> bool:
    policy = resolve(policy)
    tol = _row_tolerance(row, policy)
    v = row.values
    return all(_close(v[i], -v[-1 - i], tol) for i in range(len(v)))


def gap_variance(row: FrequencyRow):
    """Variance of consecutive gaps; zero exactly for equispaced rows."""
    g = row.gaps()
    mean = sum(g[1:], g[0]) / len(g)
    return sum(((x - mean) * (x - mean) for x in g[1:]), (g[0] - mean) * (g[0] - mean)) / len(g)


def classify_rows(rows: Sequence[FrequencyRow], declared: Optional[SamplingKind] = None,
                  policy: Optional[PrecisionPolicy] = None) -> SamplingKind:
    if all(matches_regular(r, policy) for r in rows):
        return SamplingKind.REGULAR
    if declared == SamplingKind.ALMOST_REGULAR:
        return SamplingKind.ALMOST_REGULAR
    if all(r.nu == r.N for r in rows) and any(not has_constant_gaps(r, policy) for r in rows):
        return SamplingKind.IRREGULAR
    if all(is_symmetric(r, policy) for r in rows):
        return SamplingKind.ALMOST_REGULAR
    return SamplingKind.IRREGULAR


def classify(H: FrequencyMatrix, policy: Optional[PrecisionPolicy] = None) -> SamplingKind:
    """Sampling class of a (finite truncation of a) frequency matrix.

    Regular when every row is a regular row; Irregular when ``nu(N) = N``
    throughout and at least one row has non-constant gaps; AlmostRegular for
    Minkowski-built (symmetric) rows. Rows that fit none of these are reported
    as Irregular.
    """
    for r in H.rows:
        FrequencyRow(r.N, r.values)  # re-validate range and ordering
    return classify_rows(H.rows, H.kind, policy)
