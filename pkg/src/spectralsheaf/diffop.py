"""Differential operators sum a_i(z) d^i with Laurent-series coefficients."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Sequence

from gmpy2 import mpq

from .errors import ConsistencyError, InconclusivePrecision, NotNormalized, ValidationError
from .scalars import QQ, QuadNumber, as_rational, field_of, is_rational, join_fields
from .series import INF, LaurentSeries, ls_invert, ls_mul, ls_residue

DEFAULT_TAU = 16


def _as_series(c, F=None):
    if isinstance(c, LaurentSeries):
        return c
    return LaurentSeries.const(c, F)


class DiffOp:
    """Immutable operator; coeffs[i] multiplies d^i (coefficients written on the left)."""

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs: Sequence, field=None):
        cs = [_as_series(c) for c in coeffs]
        F = field or QQ
        for c in cs:
            F = join_fields(F, c.field)
        cs = [c.lift(F) for c in cs]
        while cs and cs[-1].is_exact_zero():
            cs.pop()
        self.coeffs = tuple(cs)
        self.field = F

    @classmethod
    def d(cls, k: int = 1, field=QQ):
        one = LaurentSeries.const(field.one, field)
        zero = LaurentSeries.zero(field)
        return cls([zero] * k + [one], field)

    @classmethod
    def scalar(cls, c):
        return cls([_as_series(c)])

    @classmethod
    def mono(cls, a: LaurentSeries, k: int):
        return cls([LaurentSeries.zero(a.field)] * k + [a], a.field)

    @property
    def order(self) -> int:
        """Largest index whose coefficient has a known nonzero term (-1 for zero)."""
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i].coeffs:
                return i
        return -1

    def coeff(self, i: int) -> LaurentSeries:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return LaurentSeries.zero(self.field)

    def lc(self) -> LaurentSeries:
        n = self.order
        if n < 0:
            raise InconclusivePrecision("operator has no known nonzero coefficient")
        return self.coeffs[n]

    def is_monic(self) -> bool:
        return self.order >= 0 and self.lc().is_one()

    def is_known_zero(self) -> bool:
        return self.order < 0

    def min_prec(self):
        return min((c.prec for c in self.coeffs), default=INF)

    def is_exact(self) -> bool:
        return self.min_prec() == INF

    def lift(self, F) -> "DiffOp":
        return DiffOp([c.lift(F) for c in self.coeffs], F)

    def certified(self, tau=DEFAULT_TAU) -> "DiffOp":
        """Drop known-zero coefficients above the order after checking they are zero through z^(tau-1)."""
        n = self.order
        for c in self.coeffs[n + 1 :]:
            c.certify_zero(tau)
        return DiffOp(self.coeffs[: n + 1], self.field)

    def truncate(self, prec) -> "DiffOp":
        return DiffOp([c.truncate(prec) for c in self.coeffs], self.field)

    # ring structure
    def __add__(self, other):
        other = _as_op(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOp([self.coeff(i) + other.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return DiffOp([-c for c in self.coeffs], self.field)

    def __sub__(self, other):
        return self + (-_as_op(other))

    def __rsub__(self, other):
        return _as_op(other) - self

    def left_scale(self, a) -> "DiffOp":
        a = _as_series(a)
        return DiffOp([ls_mul(a, c) for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return do_mul(self, other)
        if isinstance(other, LaurentSeries):
            return do_mul(self, DiffOp([other]))
        return DiffOp([c.scale(other) for c in self.coeffs])

    def __rmul__(self, other):
        if isinstance(other, LaurentSeries):
            return self.left_scale(other)
        return DiffOp([c.scale(other) for c in self.coeffs])

    def __pow__(self, n: int):
        r = DiffOp.scalar(self.field.one)
        for _ in range(n):
            r = do_mul(r, self)
        return r

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            other = _as_op(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coeff(i) == other.coeff(i) for i in range(n))

    def __hash__(self):
        return hash(self.coeffs)

    def agrees(self, other, upto=None) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coeff(i).agrees(other.coeff(i), upto) for i in range(n))

    def __repr__(self):
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c.coeffs or c.prec != INF:
                terms.append(f"[{c!r}]*d^{i}")
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, d: dict) -> "DiffOp":
        return cls([LaurentSeries.from_json(c) for c in d["coeffs"]])


def _as_op(x) -> DiffOp:
    if isinstance(x, DiffOp):
        return x
    return DiffOp([_as_series(x)])


def do_mul(A: DiffOp, B: DiffOp) -> DiffOp:
    """Product using d^i b = sum_k C(i,k) b^(k) d^(i-k)."""
    F = join_fields(A.field, B.field)
    if not A.coeffs or not B.coeffs:
        return DiffOp([], F)
    nA = len(A.coeffs) - 1
    nB = len(B.coeffs) - 1
    # derivatives of B's coefficients up to order nA
    ders = []
    for b in B.coeffs:
        row = [b]
        for _ in range(nA):
            row.append(row[-1].derivative())
        ders.append(row)
    out = [LaurentSeries.zero(F) for _ in range(nA + nB + 1)]
    for i, a in enumerate(A.coeffs):
        if a.is_exact_zero():
            continue
        for j in range(nB + 1):
            for k in range(i + 1):
                bk = ders[j][k]
                if bk.is_exact_zero():
                    continue
                term = ls_mul(a, bk)
                if k:
                    term = term.scale(comb(i, k))
                out[i + j - k] = out[i + j - k] + term
    return DiffOp(out, F)


def do_apply(P: DiffOp, f: LaurentSeries) -> LaurentSeries:
    F = join_fields(P.field, f.field)
    acc = LaurentSeries.zero(F)
    g = f
    for i, a in enumerate(P.coeffs):
        if i:
            g = g.derivative()
        if not a.is_exact_zero():
            acc = acc + ls_mul(a, g)
    return acc


def commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    return do_mul(A, B) - do_mul(B, A)


def act_right(p: DiffOp, gen: str) -> DiffOp:
    """Right action on polynomials in d: p.z = p'(d) and p.d = d p(d)."""
    for c in p.coeffs:
        if not c.is_constant():
            raise ValidationError("act_right needs constant coefficients")
    if gen in ("d", "∂"):
        return DiffOp([LaurentSeries.zero(p.field)] + list(p.coeffs), p.field)
    if gen == "z":
        return DiffOp([p.coeffs[i].scale(i) for i in range(1, len(p.coeffs))], p.field)
    raise ValidationError(f"unknown generator {gen!r}")


def right_divide(A: DiffOp, B: DiffOp, tau=DEFAULT_TAU, terms=None) -> tuple[DiffOp, DiffOp]:
    """A = Q*B + R with ord R < ord B."""
    m = B.order
    if m < 0:
        raise InconclusivePrecision("divisor is zero on its known range")
    F = join_fields(A.field, B.field)
    A, B = A.lift(F), B.certified(tau).lift(F)
    lbinv = ls_invert(B.lc(), terms)
    q = {}
    R = A
    while R.order >= m:
        n = R.order
        k = n - m
        c = ls_mul(R.coeffs[n], lbinv)
        q[k] = q[k] + c if k in q else c
        R = R - do_mul(DiffOp.mono(c, k), B)
        if R.coeff(n).coeffs:
            raise ConsistencyError("leading term survived a division step")
    if q:
        Qop = DiffOp([q.get(i, LaurentSeries.zero(F)) for i in range(max(q) + 1)], F)
    else:
        Qop = DiffOp([], F)
    return Qop, R.certified(tau)


def make_monic(A: DiffOp, terms=None, tau=DEFAULT_TAU) -> DiffOp:
    A = A.certified(tau)
    if A.is_monic():
        return A
    inv = ls_invert(A.lc(), terms)
    out = A.left_scale(inv)
    n = out.order
    # the leading coefficient is 1 by construction
    return DiffOp(list(out.coeffs[:n]) + [LaurentSeries.const(out.field.one, out.field)], out.field)


def op_gcd(A: DiffOp, B: DiffOp, tau=DEFAULT_TAU, terms=None, trace: list | None = None) -> DiffOp:
    """Monic generator of the left ideal <A, B>, by the right-division Euclid loop.

    If `trace` is a list, the successive remainders are appended to it.
    """
    A, B = A.certified(tau), B.certified(tau)
    if A.order < 0 or B.order < 0:
        raise ValidationError("gcd of a zero operator")
    if B.order > A.order:
        A, B = B, A
    while True:
        _, R = right_divide(A, B, tau, terms)
        if trace is not None:
            trace.append(R)
        if R.order < 0:
            for c in R.coeffs:
                c.certify_zero(tau)
            break
        A, B = B, R
    return make_monic(B, terms, tau)


# indicial data


@dataclass
class IndicialData:
    regular_singular: bool
    gammas: list = dc_field(default_factory=list)
    indicial_poly: list = dc_field(default_factory=list)  # ascending coefficients
    exponents: list = dc_field(default_factory=list)
    irrational_exponents: bool = False

    def to_json(self):
        from .scalars import fmt_scalar

        return {
            "regular_singular": self.regular_singular,
            "gammas": [fmt_scalar(g) for g in self.gammas],
            "indicial_poly": [fmt_scalar(c) for c in self.indicial_poly],
            "exponents": [fmt_scalar(e) for e in self.exponents],
            "irrational_exponents": self.irrational_exponents,
        }


def falling(r: int) -> list:
    """Ascending integer coefficients of x(x-1)...(x-r+1)."""
    p = [1]
    for j in range(r):
        q = [0] * (len(p) + 1)
        for i, c in enumerate(p):
            q[i + 1] += c
            q[i] -= j * c
        p = q
    return p


def indicial(R: DiffOp) -> IndicialData:
    r = R.order
    if r < 1 or not R.is_monic():
        raise NotNormalized("indicial data needs a monic operator of order >= 1")
    F = R.field
    gammas = []
    regular = True
    for k in range(1, r + 1):
        c = R.coeff(r - k)
        if not c.coeffs:
            if c.prec <= -k:
                raise InconclusivePrecision(f"pole order of coefficient {k} unknown")
            gammas.append(F.zero)
            continue
        if c.val < -k:
            regular = False
            break
        gammas.append(ls_residue(c.shift(k - 1)))
    if not regular:
        return IndicialData(False)
    poly = [F.zero] * (r + 1)
    for k in range(r + 1):
        g = F.one if k == 0 else gammas[k - 1]
        for i, c in enumerate(falling(r - k)):
            poly[i] = poly[i] + g * c
    roots, irr = poly_roots(poly, F)
    return IndicialData(True, gammas, poly, roots, irr)


def _peval(p, x):
    acc = p[-1] * 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _deflate(p, x):
    """Divide by (X - x); p ascending."""
    n = len(p) - 1
    out = [None] * n
    acc = p[n]
    for i in range(n - 1, -1, -1):
        out[i] = acc
        acc = p[i] + acc * x
    return out


def _rational_candidates(p):
    from sympy import divisors

    qs = [as_rational(c) for c in p]
    den = 1
    for c in qs:
        den = den * int(c.denominator) // __import__("math").gcd(den, int(c.denominator))
    ints = [int(c * den) for c in qs]
    while ints and ints[0] == 0:
        ints = ints[1:]
    a0, an = abs(ints[0]), abs(ints[-1])
    cands = set()
    for u in divisors(a0):
        for v in divisors(an):
            cands.add(mpq(u, v))
            cands.add(mpq(-u, v))
    return sorted(cands, key=lambda x: (abs(x), x))


def poly_roots(p: list, F=QQ) -> tuple[list, bool]:
    """Roots in F (or a quadratic extension opened by a final quadratic factor) with multiplicity."""
    p = list(p)
    while p and not p[-1]:
        p.pop()
    roots = []
    while len(p) > 1 and not p[0]:
        roots.append(mpq(0))
        p = p[1:]
    while len(p) > 3:
        rational = all(is_rational(c) for c in p)
        cands = _rational_candidates(p) if rational else [mpq(i) for i in range(-64, 65)]
        hit = None
        for x in cands:
            if not _peval(p, x):
                hit = x
                break
        if hit is None:
            return sorted(roots, key=_rk), True
        roots.append(hit)
        p = _deflate(p, hit)
    if len(p) == 2:
        roots.append(-p[0] / p[1])
    elif len(p) == 3:
        c, b, a = p
        disc = b * b - 4 * a * c
        try:
            G, s = F.sqrt(disc)
        except Exception:
            return sorted(roots, key=_rk), True
        x1 = (-b + s) / (2 * a)
        x2 = (-b - s) / (2 * a)
        roots.extend([x1, x2])
        if not (is_rational(x1) and is_rational(x2)):
            return sorted(roots, key=_rk), True
    roots = [as_rational(x) if is_rational(x) else x for x in roots]
    return sorted(roots, key=_rk), False


def _rk(x):
    if isinstance(x, QuadNumber):
        return (x.a, x.b)
    return (mpq(x), mpq(0))


def normalize_subleading(P: DiffOp) -> tuple[DiffOp, LaurentSeries]:
    """Conjugate d -> d + v with v = -a_(n-1)/n so the subleading coefficient vanishes."""
    n = P.order
    if n < 1 or not P.is_monic():
        raise NotNormalized("normalize_subleading needs a monic operator")
    v = P.coeff(n - 1).scale(mpq(-1, n))
    if v.is_exact_zero():
        return P, v
    shift = DiffOp([v, LaurentSeries.const(P.field.one, P.field)])
    acc = DiffOp([], P.field)
    power = DiffOp.scalar(P.field.one)
    for i, a in enumerate(P.coeffs):
        if i:
            power = do_mul(power, shift)
        acc = acc + power.left_scale(a)
    return acc, v
