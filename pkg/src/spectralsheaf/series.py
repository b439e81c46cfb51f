"""Truncated Laurent series over Q or one quadratic field Q(sqrt d).

A series is (val, coeffs, prec): coeffs[i] is the coefficient of z**(val+i),
coefficients of z**n for n >= prec are unknown.  prec = INF marks exact data
(a Laurent polynomial).  Stored coefficients are always exact.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import InconclusivePrecision, PoleOrderExceeded, PrecisionExhausted
from .scalars import QQ, QuadNumber, field_of, fmt_scalar, join_fields, parse_scalar

INF = math.inf
POLE_CAP = -64
DEFAULT_TERMS = 48


def _inv(x):
    if isinstance(x, QuadNumber):
        return x.inverse()
    return mpq(1) / x


class LaurentSeries:
    __slots__ = ("val", "coeffs", "prec", "field")

    def __init__(self, val: int, coeffs: Sequence = (), prec=INF, field=QQ, *, _clean=False, _coerce=True):
        if not _clean:
            if _coerce:
                coeffs = [field.coerce(c) for c in coeffs]
            else:
                coeffs = list(coeffs)
            if prec != INF:
                keep = max(0, prec - val)
                coeffs = coeffs[:keep]
            lo = 0
            while lo < len(coeffs) and not coeffs[lo]:
                lo += 1
            hi = len(coeffs)
            while hi > lo and not coeffs[hi - 1]:
                hi -= 1
            val += lo
            coeffs = coeffs[lo:hi]
        self.field = field
        self.prec = prec
        if coeffs:
            if val < POLE_CAP:
                raise PoleOrderExceeded(f"valuation {val} below cap {POLE_CAP}")
            self.val = val
            self.coeffs = tuple(coeffs)
        else:
            self.val = prec
            self.coeffs = ()

    # construction helpers
    @classmethod
    def zero(cls, field=QQ, prec=INF):
        return cls(0, (), prec, field)

    @classmethod
    def const(cls, c, field=None, prec=INF):
        if field is None:
            field = field_of(c)
        return cls(0, [c], prec, field)

    @classmethod
    def monomial(cls, c, k: int, field=None, prec=INF):
        if field is None:
            field = field_of(c)
        return cls(k, [c], prec, field)

    @classmethod
    def poly(cls, coeffs: Iterable, field=QQ, prec=INF):
        """Polynomial from dense coefficients of z**0, z**1, ..."""
        return cls(0, list(coeffs), prec, field)

    # basic queries
    def is_exact(self) -> bool:
        return self.prec == INF

    def is_known_zero(self) -> bool:
        """No nonzero coefficient within the known range."""
        return not self.coeffs

    def is_exact_zero(self) -> bool:
        return not self.coeffs and self.prec == INF

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def top(self):
        """Exponent one past the last stored coefficient."""
        return self.val + len(self.coeffs)

    def coeff(self, n: int):
        if n >= self.prec:
            raise PrecisionExhausted(f"coefficient of z^{n} unknown (prec {self.prec})")
        i = n - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def __getitem__(self, n: int):
        return self.coeff(n)

    def lead(self):
        if not self.coeffs:
            raise InconclusivePrecision("series has no known nonzero coefficient")
        return self.coeffs[0]

    def is_one(self) -> bool:
        return self.val == 0 and len(self.coeffs) == 1 and self.coeffs[0] == 1

    def is_constant(self) -> bool:
        return self.is_exact() and (not self.coeffs or (self.val == 0 and len(self.coeffs) == 1))

    def lift(self, field):
        if field == self.field:
            return self
        field = join_fields(self.field, field)
        return LaurentSeries(self.val, [field.coerce(c) for c in self.coeffs], self.prec, field, _clean=True)

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        return LaurentSeries(self.val, self.coeffs, prec, self.field)

    def shift(self, k: int):
        """Multiply by z**k."""
        if not self.coeffs:
            return LaurentSeries(0, (), self.prec + k, self.field)
        return LaurentSeries(self.val + k, self.coeffs, self.prec + k, self.field, _clean=True)

    # arithmetic
    def _common(self, other):
        if isinstance(other, LaurentSeries):
            F = join_fields(self.field, other.field)
            return self.lift(F), other.lift(F)
        return self, LaurentSeries.const(other, join_fields(self.field, field_of(other))).lift(
            join_fields(self.field, field_of(other))
        )

    def __add__(self, other):
        a, b = self._common(other)
        prec = min(a.prec, b.prec)
        if not a.coeffs:
            return b.truncate(prec) if b.prec > prec else b
        if not b.coeffs:
            return a.truncate(prec) if a.prec > prec else a
        lo = min(a.val, b.val)
        hi = max(a.top, b.top)
        if prec != INF:
            hi = min(hi, prec)
        F = a.field
        out = [F.zero] * max(0, hi - lo)
        for i, c in enumerate(a.coeffs):
            k = a.val + i - lo
            if k < len(out):
                out[k] = c
        for i, c in enumerate(b.coeffs):
            k = b.val + i - lo
            if k < len(out):
                out[k] = out[k] + c
        return LaurentSeries(lo, out, prec, F, _coerce=False)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.val, [-c for c in self.coeffs], self.prec, self.field, _clean=True)

    def __sub__(self, other):
        if isinstance(other, LaurentSeries):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        F = join_fields(self.field, field_of(c))
        s = self.lift(F)
        c = F.coerce(c)
        if not c:
            return LaurentSeries(0, (), INF, F)
        return LaurentSeries(s.val, [c * x for x in s.coeffs], s.prec, F, _clean=True)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return ls_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return ls_mul(self, ls_invert(other))
        return self.scale(_inv(self.field.coerce(other)) if not isinstance(other, QuadNumber) else other.inverse())

    def __pow__(self, n: int):
        if n < 0:
            return ls_invert(self) ** (-n)
        r = LaurentSeries.const(self.field.one, self.field)
        b = self
        while n:
            if n & 1:
                r = ls_mul(r, b)
            n >>= 1
            if n:
                b = ls_mul(b, b)
        return r

    def derivative(self, k: int = 1):
        s = self
        for _ in range(k):
            s = s._d()
        return s

    def _d(self):
        out = [(self.val + i) * c for i, c in enumerate(self.coeffs)]
        return LaurentSeries(self.val - 1, out, self.prec - 1, self.field, _coerce=False)

    # comparisons
    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            if self.prec != INF:
                return NotImplemented
            return self == LaurentSeries.const(other)
        return (
            self.prec == other.prec
            and self.val == other.val
            and len(self.coeffs) == len(other.coeffs)
            and all(x == y for x, y in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.val, self.prec, self.coeffs))

    def agrees(self, other, upto=None) -> bool:
        """Coefficientwise equality on the common known range (optionally capped)."""
        p = min(self.prec, other.prec)
        if upto is not None:
            p = min(p, upto)
        return (self - other).truncate(p).is_known_zero()

    def certify_zero(self, tau) -> bool:
        """True if zero through z**(tau-1); raises if known coefficients vanish but prec < tau."""
        if self.coeffs:
            return False
        if self.prec < tau:
            raise InconclusivePrecision(f"series vanishes on known range but prec {self.prec} < tau {tau}")
        return True

    def __repr__(self):
        if not self.coeffs:
            return f"O(z^{self.prec})" if self.prec != INF else "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"({fmt_scalar(c)})*z^{self.val + i}")
        s = " + ".join(parts)
        if self.prec != INF:
            s += f" + O(z^{self.prec})"
        return s

    def to_json(self) -> dict:
        return {
            "val": self.val if self.coeffs else None,
            "prec": "inf" if self.prec == INF else int(self.prec),
            "coeffs": [fmt_scalar(c) for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, d: dict, field=QQ):
        prec = INF if d["prec"] == "inf" else int(d["prec"])
        coeffs = [parse_scalar(c) for c in d["coeffs"]]
        for c in coeffs:
            field = join_fields(field, field_of(c))
        val = d["val"] if d["val"] is not None else 0
        return cls(val, coeffs, prec, field)


def ls_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    F = join_fields(a.field, b.field)
    a, b = a.lift(F), b.lift(F)
    if not a.coeffs or not b.coeffs:
        # a zero series stores val = prec
        return LaurentSeries(0, (), min(a.prec + b.val, b.prec + a.val), F)
    val = a.val + b.val
    prec = min(a.prec + b.val, b.prec + a.val)
    la, lb = len(a.coeffs), len(b.coeffs)
    n = la + lb - 1
    if prec != INF:
        n = min(n, prec - val)
    if n <= 0:
        return LaurentSeries(0, (), prec, F)
    zero = F.zero
    out = [zero] * n
    bc = b.coeffs
    for i, x in enumerate(a.coeffs):
        if i >= n:
            break
        if not x:
            continue
        m = min(lb, n - i)
        for j in range(m):
            out[i + j] += x * bc[j]
    return LaurentSeries(val, out, prec, F, _coerce=False)


def ls_invert(a: LaurentSeries, terms: int | None = None) -> LaurentSeries:
    """Multiplicative inverse.  Exact non-monomial input is expanded to `terms` terms."""
    if not a.coeffs:
        if a.prec == INF:
            raise ZeroDivisionError("inverse of the zero series")
        raise InconclusivePrecision(f"cannot invert: zero up to z^{a.prec}")
    v = a.val
    N = a.prec - v
    if N == INF:
        if len(a.coeffs) == 1:
            return LaurentSeries(-v, [_inv(a.coeffs[0])], INF, a.field, _clean=True)
        N = terms or DEFAULT_TERMS
    N = int(N)
    c = a.coeffs
    lc = len(c)
    c0i = _inv(c[0])
    out = [c0i]
    for k in range(1, N):
        s = a.field.zero
        for i in range(1, min(k, lc - 1) + 1):
            s += c[i] * out[k - i]
        out.append(-c0i * s)
    return LaurentSeries(-v, out, -v + N, a.field, _coerce=False)


def ls_sqrt(a: LaurentSeries, terms: int | None = None) -> LaurentSeries:
    """Principal square root; opens Q(sqrt d) when the leading coefficient needs it."""
    if not a.coeffs:
        if a.prec == INF:
            return a
        raise InconclusivePrecision(f"square root of a series vanishing up to z^{a.prec}")
    v = a.val
    if v % 2:
        raise ValueError(f"square root of a series with odd valuation {v}")
    F, r0 = a.field.sqrt(a.coeffs[0])
    a = a.lift(F)
    c = a.coeffs
    exact = a.prec == INF
    if exact:
        want = (len(c) + 1) // 2
        cand = _sqrt_terms(c, r0, want, F)
        s = LaurentSeries(v // 2, cand, INF, F)
        if ls_mul(s, s) == a:
            return s
        N = terms or DEFAULT_TERMS
    else:
        N = int(a.prec - v)
    out = _sqrt_terms(c, r0, N, F)
    return LaurentSeries(v // 2, out, v // 2 + N, F)


def _sqrt_terms(c, r0, N, F):
    out = [r0]
    inv2 = _inv(2 * r0)
    lc = len(c)
    for k in range(1, N):
        s = c[k] if k < lc else F.zero
        for i in range(1, k):
            s -= out[i] * out[k - i]
        out.append(s * inv2)
    return out


def ls_residue(a: LaurentSeries):
    if a.prec <= -1:
        raise PrecisionExhausted(f"residue unknowable at prec {a.prec}")
    return a.coeff(-1)


def ls_derivative(a: LaurentSeries, k: int = 1) -> LaurentSeries:
    return a.derivative(k)


def series_from_coeffs(coeffs: Sequence, start: int = 1, prec=INF, field=QQ) -> LaurentSeries:
    """Series whose i-th listed coefficient belongs to z**(start+i)."""
    return LaurentSeries(start, list(coeffs), prec, field)


Z = LaurentSeries(1, [mpq(1)])
ONE = LaurentSeries(0, [mpq(1)])
