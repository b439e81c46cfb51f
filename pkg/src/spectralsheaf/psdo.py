"""Truncated pseudo-differential operators sum_{i <= top} a_i d^i."""
from __future__ import annotations

import math
from typing import Sequence

from gmpy2 import mpq

from .diffop import DiffOp
from .errors import NotNormalized, PrecisionExhausted
from .scalars import QQ, join_fields
from .series import LaurentSeries, ls_mul

NEG_INF = -math.inf
DEFAULT_DEPTH = 12


def gbinom(i: int, t: int) -> int:
    """Binomial coefficient C(i, t) for any integer i and t >= 0."""
    num = 1
    for s in range(t):
        num *= i - s
    return num // math.factorial(t)


class PsdOp:
    """coeffs[a] multiplies d^(top - a).

    `low` is the lowest power known exactly; -inf means every power below the
    stored ones is exactly zero (a differential operator).
    """

    __slots__ = ("top", "coeffs", "low", "field")

    def __init__(self, top: int, coeffs: Sequence[LaurentSeries], low=None, field=None):
        F = field or QQ
        for c in coeffs:
            F = join_fields(F, c.field)
        self.coeffs = tuple(c.lift(F) for c in coeffs)
        self.top = top
        self.field = F
        self.low = top - len(self.coeffs) + 1 if low is None else low

    @property
    def depth(self):
        return self.top - self.low

    def coeff(self, p: int) -> LaurentSeries:
        if p > self.top:
            return LaurentSeries.zero(self.field)
        if p < self.low:
            raise PrecisionExhausted(f"d^{p} lies below the reliable depth (lowest {self.low})")
        a = self.top - p
        if a < len(self.coeffs):
            return self.coeffs[a]
        return LaurentSeries.zero(self.field)

    @classmethod
    def from_diffop(cls, P: DiffOp) -> "PsdOp":
        n = len(P.coeffs) - 1
        return cls(n, list(reversed(P.coeffs)), NEG_INF, P.field)

    def to_diffop(self) -> DiffOp:
        if self.low > 0 and self.low != NEG_INF:
            raise PrecisionExhausted("nonnegative part not fully known")
        cs = [self.coeff(p) for p in range(0, self.top + 1)] if self.top >= 0 else []
        return DiffOp(cs, self.field)

    def __add__(self, other: "PsdOp") -> "PsdOp":
        top = max(self.top, other.top)
        low = max(self.low, other.low)
        stop = low if low != NEG_INF else min(self.top - len(self.coeffs), other.top - len(other.coeffs)) + 1
        cs = [self._get(p) + other._get(p) for p in range(top, int(stop) - 1, -1)]
        return PsdOp(top, cs, low, join_fields(self.field, other.field))

    def _get(self, p):
        a = self.top - p
        if 0 <= a < len(self.coeffs):
            return self.coeffs[a]
        return LaurentSeries.zero(self.field)

    def __neg__(self):
        return PsdOp(self.top, [-c for c in self.coeffs], self.low, self.field)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PsdOp":
        return PsdOp(self.top, [x.scale(c) for x in self.coeffs], self.low, self.field)

    def __mul__(self, other):
        if isinstance(other, PsdOp):
            return ps_mul(self, other)
        return self.scale(other)

    def truncate_depth(self, low: int) -> "PsdOp":
        if low <= self.low:
            return self
        keep = self.top - low + 1
        return PsdOp(self.top, self.coeffs[: max(0, keep)], low, self.field)

    def agrees(self, other: "PsdOp", low=None, upto=None) -> bool:
        lo = max(self.low, other.low)
        if low is not None:
            lo = max(lo, low)
        hi = max(self.top, other.top)
        if lo == NEG_INF:
            lo = min(self.top - len(self.coeffs), other.top - len(other.coeffs)) + 1
        return all(self.coeff(p).agrees(other.coeff(p), upto) for p in range(hi, int(lo) - 1, -1))

    def to_json(self) -> dict:
        return {
            "top": self.top,
            "depth": "inf" if self.low == NEG_INF else int(self.depth),
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    def __repr__(self):
        return " + ".join(f"[{c!r}]*d^{self.top - a}" for a, c in enumerate(self.coeffs) if c.coeffs) or "0"


def ps_mul(A: PsdOp, B: PsdOp, floor=None) -> PsdOp:
    """Product, computed down to the reliable depth (or `floor` if that is higher)."""
    top = A.top + B.top
    low = max(A.low + B.top, A.top + B.low)
    if floor is not None:
        low = max(low, floor)
    F = join_fields(A.field, B.field)
    if low == NEG_INF:
        # both factors are differential operators
        if A.top - len(A.coeffs) + 1 < 0 or B.top - len(B.coeffs) + 1 < 0:
            raise PrecisionExhausted("unbounded product depth")
        stop = 0
    else:
        stop = int(low)
    n = top - stop + 1
    out = [LaurentSeries.zero(F) for _ in range(max(n, 0))]
    dcache: dict[int, list] = {}

    def der(b, t):
        row = dcache.setdefault(b, [B.coeffs[b]])
        while len(row) <= t:
            row.append(row[-1].derivative())
        return row[t]

    for a, x in enumerate(A.coeffs):
        if x.is_exact_zero():
            continue
        i = A.top - a
        for b, y in enumerate(B.coeffs):
            if y.is_exact_zero():
                continue
            j = B.top - b
            tmax = i + j - stop
            if tmax < 0:
                break
            for t in range(tmax + 1):
                c = gbinom(i, t)
                if not c:
                    break
                yt = der(b, t)
                if yt.is_exact_zero():
                    continue
                term = ls_mul(x, yt)
                if c != 1:
                    term = term.scale(c)
                k = top - (i + j - t)
                out[k] = out[k] + term
    return PsdOp(top, out, low if low != NEG_INF else NEG_INF, F)


def ps_pow(A: PsdOp, n: int, floor=None) -> PsdOp:
    if n < 1:
        raise ValueError("positive powers only")
    r = A
    for _ in range(n - 1):
        r = ps_mul(r, A, floor)
    return r


def plus_part(A: PsdOp) -> DiffOp:
    return A.to_diffop()


def _is_normalized(L: DiffOp) -> bool:
    n = L.order
    return n >= 1 and L.is_monic() and L.coeff(n - 1).is_known_zero()


def rth_root(L: DiffOp, r: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """Monic S of order ord(L)/r with S^r = L, coefficients d^k ... d^(k-depth)."""
    n = L.order
    if r < 1 or n % r:
        raise NotNormalized(f"order {n} is not divisible by {r}")
    if not _is_normalized(L):
        raise NotNormalized("rth_root needs a monic operator with vanishing subleading coefficient")
    k = n // r
    F = L.field
    one = LaurentSeries.const(F.one, F)
    zero = LaurentSeries.zero(F)
    s = [one]
    ders: list[list] = [[one]]

    def der(b, t):
        row = ders[b]
        while len(row) <= t:
            row.append(row[-1].derivative())
        return row[t]

    # pw[m][j] = coefficient of d^(m*k - j) in S^(m+1), m = 0..r-1
    pw = [[one] for _ in range(r)]
    for j in range(1, depth + 1):
        s.append(zero)
        ders.append([zero])
        pw[0].append(zero)
        for m in range(1, r):
            T = m * k
            acc = zero
            for a in range(j + 1):
                xa = pw[m - 1][a]
                if xa.is_exact_zero():
                    continue
                for b in range(j - a + 1):
                    t = j - a - b
                    c = gbinom(T - a, t)
                    if not c:
                        continue
                    yt = der(b, t)
                    if yt.is_exact_zero():
                        continue
                    term = ls_mul(xa, yt)
                    acc = acc + (term.scale(c) if c != 1 else term)
            pw[m].append(acc)
        target = L.coeff(n - j) if n - j >= 0 else zero
        sj = (target - pw[r - 1][j]).scale(mpq(1, r))
        s[j] = sj
        ders[j] = [sj]
        for m in range(r):
            pw[m][j] = pw[m][j] + sj.scale(m + 1)
    return PsdOp(k, s, k - depth, F)


def build_M(L: DiffOp, depth: int = DEFAULT_DEPTH) -> DiffOp:
    """M = 2 (L^(3/2))_+ for a normalized operator of order 4."""
    if L.order != 4:
        raise NotNormalized("build_M expects an operator of order 4")
    if depth < 6:
        raise PrecisionExhausted("depth >= 6 is needed to certify every nonnegative power of L^(3/2)")
    S = rth_root(L, 2, depth)
    S2 = ps_mul(S, S, floor=-2)
    S3 = ps_mul(S2, S, floor=0)
    return DiffOp([c.scale(2) for c in plus_part(S3).coeffs], L.field)


def build_M_via_fourth_root(L: DiffOp, depth: int = DEFAULT_DEPTH) -> DiffOp:
    """Same operator from (L^(1/4))^6, used as an independent cross-check."""
    S = rth_root(L, 4, depth)
    P = S
    for e in range(2, 7):
        P = ps_mul(P, S, floor=e - 6)
    return DiffOp([c.scale(2) for c in plus_part(P).coeffs], L.field)
