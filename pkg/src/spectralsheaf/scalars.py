"""Exact scalars: rationals (gmpy2.mpq) and elements of a single quadratic field Q(sqrt d)."""
from __future__ import annotations

import re
from functools import lru_cache

from gmpy2 import is_square, isqrt, mpq, mpz

from .errors import FieldMismatch, IrrationalSupport, ParseError


def Q(x, y=None):
    """Coerce ints, strings, Fractions, mpq to mpq; Q(p, q) builds p/q."""
    if y is not None:
        if y == 0:
            raise ZeroDivisionError("zero denominator")
        return mpq(x, y)
    if isinstance(x, str):
        return parse_rational(x)
    return mpq(x)


_RAT = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(s: str):
    m = _RAT.match(s)
    if m is None:
        raise ParseError(f"not a rational literal: {s!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {s!r}")
    return mpq(num, den)


@lru_cache(maxsize=None)
def _factor_square(n: int) -> tuple[int, int]:
    """n = s * k**2 with s squarefree (sign kept in s)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    if n == 0:
        return 0, 1
    from sympy import factorint

    s, k = 1, 1
    for p, e in factorint(n).items():
        k *= p ** (e // 2)
        if e % 2:
            s *= p
    return sign * s, k


def squarefree_part(x) -> tuple[int, mpq]:
    """Write a nonzero rational x as d * r**2 with d squarefree; returns (d, r), r > 0."""
    x = mpq(x)
    p, q = int(x.numerator), int(x.denominator)
    d, k = _factor_square(p * q)
    return d, mpq(k, q)


def rational_sqrt(x):
    """Nonnegative rational square root or None."""
    x = mpq(x)
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    if is_square(p) and is_square(q):
        return mpq(isqrt(p), isqrt(q))
    return None


class RationalField:
    d = None

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def coerce(self, x):
        if isinstance(x, QuadNumber):
            if x.b:
                raise FieldMismatch("irrational element in the rational field")
            return x.a
        return mpq(x)

    zero = mpq(0)
    one = mpq(1)

    def sqrt(self, x):
        """Principal square root in this field or the quadratic field it forces."""
        x = mpq(x)
        r = rational_sqrt(x)
        if r is not None:
            return self, r
        d, r = squarefree_part(x)
        F = QuadraticField(d)
        return F, QuadNumber(0, r, d)


QQ = RationalField()


class QuadraticField:
    __slots__ = ("d",)

    def __init__(self, d: int):
        d = int(d)
        if d in (0, 1) or _factor_square(d)[1] != 1:
            raise ValueError(f"{d} is not a squarefree integer != 0, 1")
        self.d = d

    def __repr__(self):
        return f"QQ(sqrt({self.d}))"

    def __eq__(self, other):
        return isinstance(other, QuadraticField) and other.d == self.d

    def __hash__(self):
        return hash(("Qsqrt", self.d))

    @property
    def zero(self):
        return QuadNumber(0, 0, self.d)

    @property
    def one(self):
        return QuadNumber(1, 0, self.d)

    def coerce(self, x):
        if isinstance(x, QuadNumber):
            if x.d != self.d:
                raise IrrationalSupport(f"sqrt({x.d}) and sqrt({self.d}) in one computation")
            return x
        return QuadNumber(mpq(x), 0, self.d)

    def sqrt(self, x):
        x = self.coerce(x)
        r = quad_sqrt(x)
        if r is None:
            raise IrrationalSupport(f"square root of {x} needs a second extension")
        return self, r


def join_fields(F, G):
    if F == G:
        return F
    if F is QQ or isinstance(F, RationalField):
        return G
    if isinstance(G, RationalField):
        return F
    raise IrrationalSupport(f"two distinct extensions {F} and {G}")


def field_of(x):
    if isinstance(x, QuadNumber):
        return QuadraticField(x.d)
    return QQ


class QuadNumber:
    """a + b*sqrt(d) with rational a, b."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = mpq(a)
        self.b = mpq(b)
        self.d = d

    def _lift(self, o):
        if isinstance(o, QuadNumber):
            if o.d != self.d:
                raise IrrationalSupport(f"sqrt({o.d}) and sqrt({self.d}) mixed")
            return o
        return QuadNumber(o, 0, self.d)

    def __add__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return QuadNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.d)

    def __sub__(self, o):
        try:
            o = self._lift(o)
        except TypeError:
            return NotImplemented
        return QuadNumber(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, QuadNumber):
            try:
                o = mpq(o)
            except TypeError:
                return NotImplemented
            return QuadNumber(self.a * o, self.b * o, self.d)
        if o.d != self.d:
            raise IrrationalSupport(f"sqrt({o.d}) and sqrt({self.d}) mixed")
        return QuadNumber(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def norm(self):
        return self.a * self.a - self.d * self.b * self.b

    def conjugate(self):
        return QuadNumber(self.a, -self.b, self.d)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return QuadNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, o):
        if isinstance(o, QuadNumber):
            return self * o.inverse()
        o = mpq(o)
        if o == 0:
            raise ZeroDivisionError("division by zero")
        return QuadNumber(self.a / o, self.b / o, self.d)

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = QuadNumber(1, 0, self.d)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, o):
        if isinstance(o, QuadNumber):
            return self.d == o.d and self.a == o.a and self.b == o.b or (
                not self.b and not o.b and self.a == o.a
            )
        try:
            return not self.b and self.a == mpq(o)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def is_rational(self):
        return not self.b

    def __repr__(self):
        return fmt_scalar(self)


def quad_sqrt(x: QuadNumber):
    """Square root inside Q(sqrt d), principal branch, or None."""
    a, b, d = x.a, x.b, x.d
    if not b:
        r = rational_sqrt(a)
        if r is not None:
            return QuadNumber(r, 0, d)
        r = rational_sqrt(a / d)
        if r is not None:
            return QuadNumber(0, r, d)
        return None
    n = rational_sqrt(a * a - d * b * b)
    if n is None:
        return None
    for cand in ((a + n) / 2, (a - n) / 2):
        u = rational_sqrt(cand)
        if u:
            return QuadNumber(u, b / (2 * u), d)
    return None


def is_rational(x) -> bool:
    return not isinstance(x, QuadNumber) or not x.b


def as_rational(x):
    if isinstance(x, QuadNumber):
        if x.b:
            raise ValueError(f"{x} is not rational")
        return x.a
    return mpq(x)


def fmt_rational(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def fmt_scalar(x) -> str:
    if isinstance(x, QuadNumber):
        if not x.b:
            return fmt_rational(x.a)
        return f"{fmt_rational(x.a)}{'+' if x.b >= 0 else '-'}{fmt_rational(abs(x.b))}*sqrt({x.d})"
    return fmt_rational(x)


_QUAD = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(-?\d+)\s*\)\s*$")


def parse_scalar(s: str):
    """Inverse of fmt_scalar."""
    if not isinstance(s, str):
        return mpq(s)
    m = _QUAD.match(s)
    if m:
        a = parse_rational(m.group(1))
        b = parse_rational(m.group(3))
        if m.group(2) == "-":
            b = -b
        return QuadNumber(a, b, int(m.group(4)))
    return parse_rational(s)


def sign_key(x) -> tuple:
    """Total order used only to make outputs deterministic."""
    if isinstance(x, QuadNumber):
        return (x.a, x.b)
    return (mpq(x), mpq(0))


def sign_of_real(x) -> int:
    """Sign of a real element a + b sqrt(d), d > 0."""
    if not isinstance(x, QuadNumber) or not x.b:
        v = as_rational(x)
        return (v > 0) - (v < 0)
    if x.d < 0:
        raise ValueError("not a real number")
    a, b = x.a, x.b
    # compare a with -b sqrt d
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == sb or sa == 0:
        return sb if sb else sa
    if sb == 0:
        return sa
    # opposite signs: sign follows the larger magnitude
    return sa if a * a > b * b * x.d else sb


__all__ = [
    "Q",
    "QQ",
    "QuadNumber",
    "QuadraticField",
    "RationalField",
    "as_rational",
    "field_of",
    "fmt_scalar",
    "is_rational",
    "join_fields",
    "mpz",
    "parse_rational",
    "parse_scalar",
    "quad_sqrt",
    "rational_sqrt",
    "squarefree_part",
]
