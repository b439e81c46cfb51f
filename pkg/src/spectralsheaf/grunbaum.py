"""Rank-two genus-one commuting pairs L = (d^2 + c2/2)^2 + (c1 d + d c1) + c0, M = 2 (L^(3/2))_+,
and the classical Wallenberg, Dixmier and Fourier-transformed Dixmier examples."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Union

from gmpy2 import mpq

from .diffop import DEFAULT_TAU, DiffOp, commutator, do_mul
from .errors import InconclusivePrecision, IrregularC2, ValidationError
from .psdo import DEFAULT_DEPTH, build_M
from .scalars import QQ, Q, fmt_scalar
from .series import INF, LaurentSeries, ls_invert, ls_mul

DEFAULT_PREC = 48


@dataclass(frozen=True)
class SelfAdjoint:
    K2: object
    K3: object
    f: LaurentSeries
    tag = "self-adjoint"


@dataclass(frozen=True)
class Generic:
    K10: object
    K11: object
    K12: object
    K14: object
    f: LaurentSeries
    tag = "generic"


@dataclass(frozen=True)
class DegenerateSelfAdjoint:
    c2: LaurentSeries
    gamma: object
    tag = "degenerate"


@dataclass(frozen=True)
class NotLocallyFree:
    rho: object
    f: LaurentSeries
    tag = "not-locally-free"

    def as_generic(self) -> Generic:
        r = mpq(self.rho)
        return Generic(mpq(0), r, -r * r / 6, mpq(0), self.f)


GrunbaumParams = Union[SelfAdjoint, Generic, DegenerateSelfAdjoint, NotLocallyFree]


@dataclass(frozen=True)
class Dixmier:
    kappa: object
    tag = "dixmier"

    def as_self_adjoint(self) -> SelfAdjoint:
        return SelfAdjoint(8 * mpq(self.kappa), mpq(0), LaurentSeries.monomial(mpq(2), 1))


@dataclass(frozen=True)
class FourierDixmier:
    kappa: object
    tag = "fourier-dixmier"


@dataclass(frozen=True)
class Wallenberg:
    g2: object
    g3: object
    x0: object
    y0: object
    tag = "wallenberg"


@dataclass
class OperatorPair:
    L: DiffOp
    M: DiffOp
    g2: object
    g3: object
    rank: int
    provenance: object
    # M^2 = a3 L^3 + a1 L + a0
    relation: tuple = field(default=None)

    def __post_init__(self):
        if self.relation is None:
            self.relation = (mpq(4), -mpq(self.g2), -mpq(self.g3))


@dataclass
class VerifyReport:
    commutator_zero: bool
    commutator_prec: object
    relation_holds: bool
    relation_prec: object
    rank: int
    orders: tuple

    @property
    def ok(self) -> bool:
        return self.commutator_zero and self.relation_holds

    def to_json(self) -> dict:
        p = lambda x: "inf" if x == INF else int(x)  # noqa: E731
        return {
            "commutator_zero": self.commutator_zero,
            "commutator_prec": p(self.commutator_prec),
            "relation_holds": self.relation_holds,
            "relation_prec": p(self.relation_prec),
            "rank": self.rank,
            "orders": list(self.orders),
        }


def poly_f(coeffs, start: int = 1) -> LaurentSeries:
    """f = sum a_i z^i from the list [a_start, a_start+1, ...] (exact)."""
    return LaurentSeries(start, [Q(c) for c in coeffs])


def series_div(N: LaurentSeries, D: LaurentSeries, prec: int) -> LaurentSeries:
    """N/D, expanding exact non-monomial denominators far enough for absolute precision `prec`."""
    if not D.coeffs:
        raise InconclusivePrecision("denominator vanishes on its known range")
    if not N.coeffs:
        if N.prec == INF:
            return LaurentSeries.zero(N.field)
        return ls_mul(N, ls_invert(D, max(1, prec - N.prec + D.val)))
    terms = max(1, prec - N.val + D.val)
    return ls_mul(N, ls_invert(D, terms))


def _L_from(c0: LaurentSeries, c1: LaurentSeries, c2: LaurentSeries) -> DiffOp:
    d = DiffOp.d()
    P = d * d + DiffOp([c2.scale(mpq(1, 2))])
    C1 = DiffOp([c1])
    return do_mul(P, P) + do_mul(C1, d) + do_mul(d, C1) + DiffOp([c0])


def _check_c2(c2: LaurentSeries):
    if not c2.coeffs:
        if c2.prec <= 0:
            raise InconclusivePrecision("c2 vanishes on a range too short to decide regularity")
        return
    if c2.val < 0:
        raise IrregularC2(f"c2 has a pole of order {-c2.val} at z = 0")


def self_adjoint_c2(K2, K3, f: LaurentSeries, prec=DEFAULT_PREC) -> LaurentSeries:
    f1, f2, f3 = f.derivative(), f.derivative(2), f.derivative(3)
    if not f1.coeffs:
        raise ValidationError("f must be non-constant")
    N = ls_mul(ls_mul(f, f), f) - ls_mul(f3, f1) + ls_mul(f2, f2).scale(mpq(1, 2)) + f.scale(2 * mpq(K3)) + mpq(K2)
    c2 = series_div(N, ls_mul(f1, f1), prec)
    _check_c2(c2)
    return c2


def generic_c2(K10, K11, K12, K14, f: LaurentSeries, prec=DEFAULT_PREC) -> LaurentSeries:
    f1, f2, f3 = f.derivative(), f.derivative(2), f.derivative(3)
    if not f1.coeffs:
        raise ValidationError("f must be non-constant")
    ff = ls_mul(f, f)
    N = (
        LaurentSeries.const(mpq(K14))
        - f.scale(2 * mpq(K10))
        + ff.scale(6 * mpq(K12))
        + ls_mul(ff, f).scale(2 * mpq(K11))
        - ls_mul(ff, ff)
        + ls_mul(f2, f2)
        - ls_mul(f1, f3).scale(2)
    )
    c2 = series_div(N, ls_mul(f1, f1).scale(2), prec)
    _check_c2(c2)
    return c2


def generic_curve(K10, K11, K12, K14) -> tuple:
    K10, K11, K12, K14 = map(mpq, (K10, K11, K12, K14))
    g2 = 3 * K12**2 + K10 * K11 - K14
    g3 = (2 * K10 * K11 * K12 + 4 * K12**3 + K14 * (K11**2 + 4 * K12) - K10**2) / 4
    return g2, g3


def self_adjoint_curve(K2, K3) -> tuple:
    return -2 * mpq(K3), mpq(K2) / 2


def build_self_adjoint(K2, K3, f: LaurentSeries, prec=DEFAULT_PREC, depth=DEFAULT_DEPTH) -> OperatorPair:
    K2, K3 = mpq(K2), mpq(K3)
    c2 = self_adjoint_c2(K2, K3, f, prec)
    L = _L_from(f, LaurentSeries.zero(), c2)
    M = build_M(L, depth)
    g2, g3 = self_adjoint_curve(K2, K3)
    return OperatorPair(L, M, g2, g3, 2, SelfAdjoint(K2, K3, f))


def build_generic(K10, K11, K12, K14, f: LaurentSeries, prec=DEFAULT_PREC, depth=DEFAULT_DEPTH) -> OperatorPair:
    K10, K11, K12, K14 = map(mpq, (K10, K11, K12, K14))
    if f.coeffs and f.val < 1 or (not f.coeffs and f.prec < 1):
        raise ValidationError("f(0) = 0 is required")
    c2 = generic_c2(K10, K11, K12, K14, f, prec)
    c0 = -ls_mul(f, f) + f.scale(K11) + K12
    L = _L_from(c0, f.derivative(), c2)
    M = build_M(L, depth)
    g2, g3 = generic_curve(K10, K11, K12, K14)
    return OperatorPair(L, M, g2, g3, 2, Generic(K10, K11, K12, K14, f))


def check_not_locally_free_f(f: LaurentSeries):
    if not f.coeffs or f.val < 1:
        raise ValidationError("f(0) = 0 is required")
    a = [f.coeff(i) for i in range(1, 5)]
    if a[0]:
        return
    if not a[1] and not a[3] and a[2]:
        return
    raise ValidationError("f needs f'(0) != 0, or f'(0) = f''(0) = f''''(0) = 0 with f'''(0) != 0")


def build_not_locally_free(rho, f: LaurentSeries, prec=DEFAULT_PREC, depth=DEFAULT_DEPTH) -> OperatorPair:
    check_not_locally_free_f(f)
    g = NotLocallyFree(mpq(rho), f).as_generic()
    pair = build_generic(g.K10, g.K11, g.K12, g.K14, f, prec, depth)
    pair.provenance = NotLocallyFree(mpq(rho), f)
    return pair


def build_degenerate(c2: LaurentSeries, gamma, depth=DEFAULT_DEPTH) -> OperatorPair:
    _check_c2(c2)
    gamma = mpq(gamma)
    L = _L_from(LaurentSeries.const(gamma), LaurentSeries.zero(), c2)
    M = build_M(L, depth)
    return OperatorPair(L, M, 3 * gamma**2, gamma**3, 2, DegenerateSelfAdjoint(c2, gamma))


def build_pair(params, prec=DEFAULT_PREC, depth=DEFAULT_DEPTH) -> OperatorPair:
    if isinstance(params, SelfAdjoint):
        return build_self_adjoint(params.K2, params.K3, params.f, prec, depth)
    if isinstance(params, NotLocallyFree):
        return build_not_locally_free(params.rho, params.f, prec, depth)
    if isinstance(params, Generic):
        return build_generic(params.K10, params.K11, params.K12, params.K14, params.f, prec, depth)
    if isinstance(params, DegenerateSelfAdjoint):
        return build_degenerate(params.c2, params.gamma, depth)
    if isinstance(params, Dixmier):
        return build_dixmier(params.kappa)
    if isinstance(params, FourierDixmier):
        return build_fourier_dixmier(params.kappa)
    if isinstance(params, Wallenberg):
        return build_wallenberg(params.g2, params.g3, params.x0, params.y0, prec)
    raise ValidationError(f"unknown parameter record {params!r}")


def build_dixmier(kappa) -> OperatorPair:
    kappa = mpq(kappa)
    d = DiffOp.d()
    z = DiffOp([LaurentSeries.monomial(mpq(1), 1)])
    D = d * d + z * z * z + kappa
    P = D * D + z * 2
    Qo = D * D * D + (z * D + D * z) * mpq(3, 2)
    # (2Q)^2 = 4P^3 - 4 kappa
    return OperatorPair(P, Qo, mpq(0), 4 * kappa, 2, Dixmier(kappa), relation=(mpq(1), mpq(0), -kappa))


def build_fourier_dixmier(kappa) -> OperatorPair:
    kappa = mpq(kappa)
    d = DiffOp.d()
    z = DiffOp([LaurentSeries.monomial(mpq(1), 1)])
    D = d * d * d + z * z + kappa
    P = D * D + d * 2
    Qo = D * D * D + (d * D + D * d) * mpq(3, 2)
    return OperatorPair(P, Qo, mpq(0), 4 * kappa, 3, FourierDixmier(kappa), relation=(mpq(1), mpq(0), -kappa))


def wallenberg_u(g2, g3, x0, y0, prec=DEFAULT_PREC) -> LaurentSeries:
    """Series solution of u'' = 6u^2 - g2/2 with u(0) = x0, u'(0) = y0."""
    g2, g3, x0, y0 = map(mpq, (g2, g3, x0, y0))
    if y0 == 0:
        raise ValidationError("the seed needs y0 != 0")
    if y0 * y0 != 4 * x0**3 - g2 * x0 - g3:
        raise ValidationError("seed (x0, y0) is not on y^2 = 4x^3 - g2 x - g3")
    u = [x0, y0]
    for n in range(prec - 2):
        s = sum((u[i] * u[n - i] for i in range(n + 1)), mpq(0)) * 6
        if n == 0:
            s -= g2 / 2
        u.append(s / ((n + 2) * (n + 1)))
    return LaurentSeries(0, u[:prec], prec)


def build_wallenberg(g2, g3, x0, y0, prec=DEFAULT_PREC) -> OperatorPair:
    # u'' and u''' cost precision; pad so both relations hold through z^(prec-1)
    u = wallenberg_u(g2, g3, x0, y0, prec + 4)
    d = DiffOp.d()
    U = DiffOp([u])
    P = d * d - U * 2
    Qo = d * d * d * 2 - do_mul(U, d) * 6 - DiffOp([u.derivative()]) * 3
    return OperatorPair(P, Qo, mpq(g2), mpq(g3), 1, Wallenberg(*map(mpq, (g2, g3, x0, y0))))


def _certify(op: DiffOp, tau) -> tuple[bool, object]:
    """(is zero, precision of the certificate)."""
    if op.order >= 0:
        return False, op.coeffs[op.order].val
    p = op.min_prec()
    if p < tau:
        raise InconclusivePrecision(f"vanishing only certified through z^{p - 1} (tau = {tau})")
    return True, p


def verify_pair(pair: OperatorPair, tau=DEFAULT_TAU) -> VerifyReport:
    L, M = pair.L, pair.M
    cz, cp = _certify(commutator(L, M), tau)
    a3, a1, a0 = pair.relation
    L2 = do_mul(L, L)
    rel = do_mul(M, M) - do_mul(L2, L) * a3 - L * a1 - a0
    rz, rp = _certify(rel, tau)
    rank = gcd(L.order, M.order)
    return VerifyReport(cz, cp, rz, rp, rank, (L.order, M.order))


def params_to_json(params) -> dict:
    out = {"family": params.tag}
    for k, v in params.__dict__.items():
        out[k] = v.to_json() if isinstance(v, LaurentSeries) else fmt_scalar(v)
    return out


__all__ = [
    "DEFAULT_PREC",
    "DegenerateSelfAdjoint",
    "Dixmier",
    "FourierDixmier",
    "Generic",
    "GrunbaumParams",
    "NotLocallyFree",
    "OperatorPair",
    "SelfAdjoint",
    "VerifyReport",
    "Wallenberg",
    "build_degenerate",
    "build_dixmier",
    "build_fourier_dixmier",
    "build_generic",
    "build_not_locally_free",
    "build_pair",
    "build_self_adjoint",
    "build_wallenberg",
    "generic_curve",
    "poly_f",
    "self_adjoint_curve",
    "verify_pair",
    "QQ",
]
