"""Spectral curve data, support of the torsion sheaf, gcds at characters and the sheaf classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .diffop import DEFAULT_TAU, DiffOp, IndicialData, indicial, op_gcd
from .errors import ConsistencyError, InconclusivePrecision, IrrationalSupport, ValidationError
from .grunbaum import (
    DEFAULT_PREC,
    DegenerateSelfAdjoint,
    Dixmier,
    FourierDixmier,
    Generic,
    NotLocallyFree,
    OperatorPair,
    SelfAdjoint,
    Wallenberg,
    build_pair,
    generic_curve,
    self_adjoint_curve,
)
from .psdo import DEFAULT_DEPTH
from .scalars import QQ, QuadNumber, QuadraticField, as_rational, field_of, fmt_scalar, is_rational, join_fields
from .series import INF, LaurentSeries, ls_mul, ls_residue, ls_sqrt

SMOOTH, NODAL, CUSPIDAL = "smooth", "nodal", "cuspidal"
ALLOWED_EXPONENTS = {(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class CurveInfo:
    g2: object
    g3: object
    delta: object
    kind: str
    singular_point: Optional[tuple]

    def h(self, x):
        return 4 * x * x * x - self.g2 * x - self.g3

    def to_json(self):
        return {
            "g2": fmt_scalar(self.g2),
            "g3": fmt_scalar(self.g3),
            "delta": fmt_scalar(self.delta),
            "kind": self.kind,
            "singular_point": None if self.singular_point is None else [fmt_scalar(c) for c in self.singular_point],
        }


def curve_info(g2, g3) -> CurveInfo:
    """Data of y^2 = 4x^3 - g2 x - g3.  The node sits at x = -3 g3 / (2 g2)."""
    g2, g3 = mpq(g2), mpq(g3)
    delta = g2**3 - 27 * g3**2
    if delta:
        return CurveInfo(g2, g3, delta, SMOOTH, None)
    if g2 == 0:
        return CurveInfo(g2, g3, delta, CUSPIDAL, (mpq(0), mpq(0)))
    return CurveInfo(g2, g3, delta, NODAL, (-3 * g3 / (2 * g2), mpq(0)))


# ---------------------------------------------------------------- support


@dataclass(frozen=True)
class SupportPoint:
    lam: object
    mu: object
    is_singular_point: bool = False
    note: str = ""

    def to_json(self):
        return {
            "lambda": fmt_scalar(self.lam),
            "mu": fmt_scalar(self.mu),
            "is_singular_point": self.is_singular_point,
            "note": self.note,
        }

    @property
    def coords(self):
        return (self.lam, self.mu)


def abc(K10, K11, K12, K14, lam):
    """The three polynomials a, b, c of the generic family evaluated at lam."""
    t = lam + K12 / 2
    a = t * t + K14 / 4
    b = t * K11 - K10 / 2
    c = -lam + K12 + K11 * K11 / 4
    return a, b, c


def _curve_of(params) -> CurveInfo:
    if isinstance(params, NotLocallyFree):
        params = params.as_generic()
    if isinstance(params, Generic):
        return curve_info(*generic_curve(params.K10, params.K11, params.K12, params.K14))
    if isinstance(params, Dixmier):
        params = params.as_self_adjoint()
    if isinstance(params, SelfAdjoint):
        return curve_info(*self_adjoint_curve(params.K2, params.K3))
    if isinstance(params, DegenerateSelfAdjoint):
        g = mpq(params.gamma)
        return curve_info(3 * g * g, g**3)
    if isinstance(params, FourierDixmier):
        return curve_info(0, 4 * mpq(params.kappa))
    if isinstance(params, Wallenberg):
        return curve_info(params.g2, params.g3)
    raise ValidationError(f"unknown parameter record {params!r}")


def _is_sing(curve: CurveInfo, lam, mu) -> bool:
    sp = curve.singular_point
    return sp is not None and not mu and lam == sp[0]


def support_of_T(params) -> list[SupportPoint]:
    curve = _curve_of(params)
    if isinstance(params, NotLocallyFree):
        params = params.as_generic()
    if isinstance(params, Dixmier):
        params = params.as_self_adjoint()
    if isinstance(params, Generic):
        K10, K11, K12, K14 = map(mpq, (params.K10, params.K11, params.K12, params.K14))
        r = QQ.sqrt(-K14 / 4)[1] if K14 else mpq(0)
        roots = [-K12 / 2 + r, -K12 / 2 - r] if K14 else [-K12 / 2]
        pts = []
        for lam in roots:
            lam = _norm(lam)
            mu = _norm(-abc(K10, K11, K12, K14, lam)[1])
            note = "double root of a" if not K14 else ""
            pts.append(SupportPoint(lam, mu, _is_sing(curve, lam, mu), note))
        return _sorted_points(pts)
    if isinstance(params, SelfAdjoint):
        lam = -params.f.coeff(0) / 2
        h = curve.h(lam)
        if not h:
            return [SupportPoint(lam, mpq(0), _is_sing(curve, lam, 0), "mu = 0")]
        r = QQ.sqrt(h)[1]
        pts = [SupportPoint(lam, _norm(r), False), SupportPoint(lam, _norm(-r), False)]
        return _sorted_points(pts)
    if isinstance(params, DegenerateSelfAdjoint):
        (x, y) = curve.singular_point
        return [SupportPoint(x, y, True, "S + S")]
    if isinstance(params, FourierDixmier):
        return fourier_dixmier_support(mpq(params.kappa))
    raise ValidationError("support is only defined for the rank-two families and the Fourier-Dixmier example")


def fourier_dixmier_support(kappa) -> list[SupportPoint]:
    if kappa == 0:
        return [SupportPoint(mpq(0), mpq(0), True, "cusp, multiplicity 3")]
    num, den = int(kappa.numerator), int(kappa.denominator)
    from gmpy2 import iroot

    rn, en = iroot(abs(num), 3)
    rd, ed = iroot(den, 3)
    if not (en and ed):
        raise IrrationalSupport(f"cube roots of {fmt_scalar(kappa)} need a cubic extension")
    c = mpq(int(rn) * (1 if num > 0 else -1), int(rd))
    w = QuadNumber(mpq(-1, 2), mpq(1, 2), -3)
    pts = [SupportPoint(c, mpq(0)), SupportPoint(c * w, QuadNumber(0, 0, -3)), SupportPoint(c * w * w, QuadNumber(0, 0, -3))]
    return pts


def _norm(x):
    if isinstance(x, QuadNumber) and not x.b:
        return x.a
    return x


def _sorted_points(pts):
    def key(p):
        k = []
        for x in (p.lam, p.mu):
            if isinstance(x, QuadNumber):
                k.append((x.a, x.b))
            else:
                k.append((mpq(x), mpq(0)))
        return k

    return sorted(pts, key=key)


# ---------------------------------------------------------------- gcd at a character


@dataclass
class GcdResult:
    R: DiffOp
    remainders: list
    checks: list = field(default_factory=list)

    @property
    def order(self):
        return self.R.order


def on_curve(pair: OperatorPair, lam, mu) -> bool:
    a3, a1, a0 = pair.relation
    return mu * mu == a3 * lam**3 + a1 * lam + a0


def gcd_with_trace(pair: OperatorPair, lam, mu, tau=DEFAULT_TAU, terms=None) -> GcdResult:
    if not on_curve(pair, lam, mu):
        raise ValidationError(f"({fmt_scalar(lam)}, {fmt_scalar(mu)}) is not on the spectral curve")
    F = join_fields(field_of(lam), field_of(mu))
    L, M = pair.L.lift(F), pair.M.lift(F)
    trace: list = []
    R = op_gcd(M - mu, L - lam, tau, terms, trace)
    res = GcdResult(R, trace)
    _division_checks(pair, lam, mu, res, tau)
    return res


def gcd_at_point(pair: OperatorPair, lam, mu, tau=DEFAULT_TAU, terms=None) -> DiffOp:
    return gcd_with_trace(pair, lam, mu, tau, terms).R


def _agree_or_fail(a: LaurentSeries, b: LaurentSeries, what: str, tau):
    diff = a - b
    if diff.coeffs:
        raise ConsistencyError(f"{what}: division result disagrees with the closed form")
    if diff.prec < tau:
        raise InconclusivePrecision(f"{what}: agreement only through z^{diff.prec - 1}")


def _division_checks(pair: OperatorPair, lam, mu, res: GcdResult, tau):
    p = pair.provenance
    if isinstance(p, NotLocallyFree):
        p = p.as_generic()
    rem = res.remainders
    if isinstance(p, Generic):
        K10, K11, K12, K14 = (mpq(x) for x in (p.K10, p.K11, p.K12, p.K14))
        a, b, c = abc(K10, K11, K12, K14, lam)
        f = p.f.lift(join_fields(field_of(lam), field_of(mu)))
        e0 = f.scale(b) + ls_mul(f, f).scale(c) + a
        f1 = f.derivative()
        e1 = f1.scale((b - mu) / 2) + ls_mul(f, f1).scale(c)
        if rem[0].order != 3:
            raise ConsistencyError(f"first remainder has order {rem[0].order}, expected 3")
        Rhat = rem[1] if len(rem) > 1 else DiffOp([])
        if Rhat.order > 2:
            raise ConsistencyError("second remainder has order > 2")
        R2, R1 = Rhat.coeff(2), Rhat.coeff(1)
        if not e0.coeffs and e0.prec == INF:
            _agree_or_fail(R2, LaurentSeries.zero(e0.field), "e0", tau)
            _agree_or_fail(R1, LaurentSeries.zero(e0.field), "e1", tau)
        else:
            # the remainder is fixed only up to a unit on the left: compare ratios
            if not R2.coeffs:
                raise ConsistencyError("second remainder lost its d^2 term although e0 != 0")
            _agree_or_fail(ls_mul(R2, e1) + ls_mul(R1, e0), LaurentSeries.zero(e0.field), "e1/e0", tau)
        res.checks.append("second remainder is proportional to e0 d^2 - e1 d + ...")
    elif isinstance(p, SelfAdjoint):
        f = p.f.lift(join_fields(field_of(lam), field_of(mu)))
        R0 = rem[0]
        if R0.order != 2:
            raise ConsistencyError(f"first remainder has order {R0.order}, expected 2")
        _agree_or_fail(R0.coeff(2), f + 2 * lam, "leading remainder coefficient", tau)
        _agree_or_fail(R0.coeff(1), -f.derivative(), "remainder d-coefficient", tau)
        res.checks.append("first remainder is (2 lambda + f) d^2 - f' d + ...")


# ---------------------------------------------------------------- exponents


@dataclass
class ExponentData:
    nu: Optional[int]
    exponents: list
    indicial: IndicialData
    c1_pole: bool

    def to_json(self):
        return {
            "nu": self.nu,
            "exponents": [fmt_scalar(e) for e in self.exponents],
            "c1_pole": self.c1_pole,
            "indicial": self.indicial.to_json(),
        }


def exponents_nu(R: DiffOp) -> tuple:
    data = exponent_data(R)
    return data.nu, data.exponents


def exponent_data(R: DiffOp) -> ExponentData:
    r = R.order
    c1 = R.coeff(r - 1)
    if not c1.coeffs and c1.prec <= 0:
        raise InconclusivePrecision("subleading coefficient unknown near z = 0")
    pole = bool(c1.coeffs) and c1.val < 0
    ind = indicial(R)
    if r != 2:
        return ExponentData(None, list(ind.exponents), ind, pole)
    res = ls_residue(c1)
    if not is_rational(res):
        raise ConsistencyError("irrational residue of c1")
    nu = -as_rational(res) - 1
    if nu.denominator != 1:
        raise ConsistencyError(f"non-integral exponent parameter {nu}")
    nu = int(nu)
    ex = list(ind.exponents)
    if ind.regular_singular and not ind.irrational_exponents:
        if sum(ex) != nu + 2:
            raise ConsistencyError(f"exponent sum {sum(ex)} != nu + 2 = {nu + 2}")
    return ExponentData(nu, ex, ind, pole)


# ---------------------------------------------------------------- nodal branch


@dataclass
class NodalBranch:
    label: str
    lam: object
    rho: object
    contained_in: str
    hilbert_parameter: tuple
    convention: str

    def to_json(self):
        return {
            "label": self.label,
            "lambda": fmt_scalar(self.lam),
            "sqrt_lambda": fmt_scalar(self.rho),
            "contained_in": self.contained_in,
            "hilbert_parameter": [fmt_scalar(x) for x in self.hilbert_parameter],
            "convention": self.convention,
        }


BRANCH_CONVENTION = (
    "X = x + K12/2, Y = y/2 so that Y^2 = X^3 + lambda X^2 with lambda = -3 K12/2; "
    "u+ = Y + w, u- = Y - w with w = X sqrt(lambda + X) and sqrt(lambda) > 0; "
    "U+ has torsion module R/(u+, u-^2), U- has R/(u-, u+^2)"
)


def _val(s: LaurentSeries):
    return s.val if s.coeffs else INF


def nodal_branch(K11, K12, prec: int = 8) -> NodalBranch:
    K11, K12 = mpq(K11), mpq(K12)
    if K12 == 0:
        raise ValidationError("nodal_branch needs K12 != 0 (the cuspidal case has no branches)")
    if 6 * K12 + K11 * K11 != 0:
        raise ValidationError("nodal_branch needs 6 K12 + K11^2 = 0")
    lam = -3 * K12 / 2
    F, rho = QQ.sqrt(lam)
    # w = X sqrt(lambda + X), principal root on the constant term
    w = ls_sqrt(LaurentSeries(0, [lam, mpq(1)], prec, QQ)).shift(1)
    X = LaurentSeries.monomial(F.one, 1)
    c = K11 / 2
    # the descriptor (x + K12/2)^2, y - K11 (x + K12/2) becomes X^2, 2 (Y - c X)
    gens = [(ls_mul(X, X), ls_mul(X, X)), ((w - X.scale(c)).scale(2), (-w - X.scale(c)).scale(2))]
    in_plus = all(_val(ga) >= 1 and _val(gb) >= 2 for ga, gb in gens)
    in_minus = all(_val(ga) >= 2 and _val(gb) >= 1 for ga, gb in gens)
    for ga, gb in gens:
        if min(ga.prec, gb.prec) < 3:
            raise InconclusivePrecision("branch expansions too short to read valuations")
    if in_plus == in_minus:
        raise ConsistencyError("descriptor is not one of the two branch ideals")
    label = "U_plus" if in_plus else "U_minus"
    where = "(u+, u-^2)" if in_plus else "(u-, u+^2)"
    return NodalBranch(label, lam, rho, where, (mpq(1), K11), BRANCH_CONVENTION)


# ---------------------------------------------------------------- classification


@dataclass
class PointEvidence:
    point: SupportPoint
    gcd_order: int
    exponents: Optional[ExponentData]
    gcd: DiffOp
    checks: list

    def to_json(self):
        return {
            "point": self.point.to_json(),
            "gcd": {"order": self.gcd_order, "coeffs": [c.to_json() for c in self.gcd.coeffs]},
            "exponents": None if self.exponents is None else self.exponents.to_json(),
            "checks": self.checks,
        }


@dataclass
class SheafClass:
    tag: str
    data: dict = field(default_factory=dict)
    torsion_descriptor: Optional[dict] = None
    log: list = field(default_factory=list)
    curve: Optional[CurveInfo] = None
    support: list = field(default_factory=list)
    evidence: list = field(default_factory=list)

    def data_json(self):
        out = {}
        for k, v in self.data.items():
            if isinstance(v, tuple):
                out[k] = [fmt_scalar(x) if not isinstance(x, str) else x for x in v]
            elif isinstance(v, list):
                out[k] = [[fmt_scalar(x) for x in p] if isinstance(p, tuple) else p for p in v]
            elif isinstance(v, (str, int, bool)) or v is None:
                out[k] = v
            elif hasattr(v, "to_json"):
                out[k] = v.to_json()
            else:
                out[k] = fmt_scalar(v)
        return out


def _pt(p: SupportPoint):
    return (p.lam, p.mu)


def classify_sheaf(params, tau=DEFAULT_TAU, prec=DEFAULT_PREC, depth=DEFAULT_DEPTH, pair: OperatorPair | None = None) -> SheafClass:
    """Decision tree for the spectral sheaf, cross-checked against gcds and exponents at the support."""
    if isinstance(params, Wallenberg):
        raise ValidationError("rank-one pairs have line-bundle spectral sheaves; classification covers ranks two and three")
    if pair is None:
        pair = build_pair(params, prec, depth)
    if isinstance(params, Dixmier) and pair.relation[0] == 1:
        # y = 2Q puts the pair on y^2 = 4x^3 - 4 kappa, the self-adjoint normalization
        pair = OperatorPair(pair.L, pair.M * 2, pair.g2, pair.g3, pair.rank, params)
    curve = _curve_of(params)
    support = support_of_T(params)
    log: list[str] = []
    cls = _decide(params, curve, support, log)
    cls.log = log
    cls.curve = curve
    cls.support = support
    cls.evidence = [_evidence(pair, p, tau) for p in support]
    _cross_check(cls)
    return cls


def _decide(params, curve: CurveInfo, support, log) -> SheafClass:
    if isinstance(params, DegenerateSelfAdjoint):
        log.append("c1 = 0 and c0 = gamma is constant -> S + S")
        return SheafClass("S_plus_S")
    if isinstance(params, FourierDixmier):
        kappa = mpq(params.kappa)
        if kappa == 0:
            log.append("kappa = 0: support is the cusp -> E_p")
            return SheafClass("Rank3_E_p", {"point": "p"})
        log.append("kappa != 0: three distinct points (lambda, 0) with lambda^3 = kappa")
        return SheafClass("Rank3_LineSum3", {"points": [_pt(p) for p in support]})
    if isinstance(params, Dixmier):
        log.append("Dixmier pair read as the self-adjoint family with (K2, K3, f) = (8 kappa, 0, 2z)")
        params = params.as_self_adjoint()
    if isinstance(params, SelfAdjoint):
        return _decide_self_adjoint(params, curve, support, log)
    if isinstance(params, NotLocallyFree):
        params = params.as_generic()
    if isinstance(params, Generic):
        return _decide_generic(params, curve, support, log)
    raise ValidationError(f"cannot classify {params!r}")


def _ord0(f: LaurentSeries) -> int:
    if not f.coeffs:
        raise InconclusivePrecision("f vanishes on its known range")
    return f.val


def _decide_self_adjoint(p: SelfAdjoint, curve, support, log) -> SheafClass:
    f1 = p.f.derivative()
    nu = _ord0(f1)
    if len(support) == 2:
        log.append("mu^2 = h(lambda0) != 0 -> two distinct points q+, q-")
        return SheafClass("LineSum", {"q1": _pt(support[0]), "q2": _pt(support[1])})
    q = support[0]
    if q.is_singular_point:
        log.append("mu = 0 and lambda0 is the singular abscissa: Z = {s} -> B_p")
        return SheafClass("B", {"point": "p"})
    if nu == 3:
        log.append("q+ = q- smooth and f' vanishes to order 3 -> O(q) + O(q)")
        return SheafClass("LineSquare", {"q": _pt(q)})
    log.append(f"q+ = q- smooth and f' vanishes to order {nu} != 3 -> A (x) O(q)")
    return SheafClass("AtiyahTwist", {"q": _pt(q)})


def _decide_generic(p: Generic, curve, support, log) -> SheafClass:
    K10, K11, K12, K14 = (mpq(x) for x in (p.K10, p.K11, p.K12, p.K14))
    t = 3 * K12 + K11 * K11 / 2
    Delta = 6 * K12 + K11 * K11
    X = "x + K12/2"
    descriptor = {
        "generators": [f"({X})^2", f"y - ({fmt_scalar(K11)})*({X})"],
        "K12_half": fmt_scalar(K12 / 2),
        "K11": fmt_scalar(K11),
        "hilbert_parameter": ["1", fmt_scalar(K11)],
    }
    if K10 == t * K11 and K14 == -t * t:
        log.append("K10 = (3K12 + K11^2/2) K11 and K14 = -(3K12 + K11^2/2)^2: not locally free")
        s = curve.singular_point
        if Delta != 0:
            log.append(f"Delta = 6K12 + K11^2 = {fmt_scalar(Delta)} != 0 -> S + O(q)")
            lam = -2 * K12 - K11 * K11 / 4
            mu = -abc(K10, K11, K12, K14, lam)[1]
            return SheafClass("S_plus_Line", {"q": (lam, mu), "s": s})
        log.append("Delta = 0: indecomposable, support {s}")
        if K11 == 0 and K12 == 0:
            log.append("K11 = K12 = 0: cuspidal curve -> U")
            return SheafClass("U_cuspidal", {"s": s}, descriptor)
        nb = nodal_branch(K11, K12)
        log.append(f"nodal curve: descriptor lies in {nb.contained_in} -> {nb.label}")
        return SheafClass(nb.label, {"s": s, "branch": nb}, descriptor)
    if K10 == 0 and K14 == 0:
        log.append("K10 = K14 = 0 with the not-locally-free equations failing: Delta != 0, locally free, Z = {s}")
        qbar = (K11 * K11 / 4 + K12, K11 / 4 * Delta)
        return SheafClass("B", {"point": qbar}, descriptor)
    if len(support) == 2:
        q1, q2 = support
        if q1.is_singular_point or q2.is_singular_point:
            raise ConsistencyError("support meets the singular point although the sheaf should be locally free")
        log.append("a(lambda) has two distinct roots -> O(q1) + O(q2)")
        return SheafClass("LineSum", {"q1": _pt(q1), "q2": _pt(q2)})
    q = support[0]
    if q.is_singular_point:
        raise ConsistencyError("single support point at the singular point outside the K10 = K14 = 0 family")
    nu = _ord0(p.f.derivative())
    if nu == 3:
        log.append("K14 = 0, K10 != 0: single smooth point and f vanishes to order 4 -> O(q) + O(q)")
        return SheafClass("LineSquare", {"q": _pt(q)})
    log.append(f"K14 = 0, K10 != 0: single smooth point, f' vanishes to order {nu} -> A (x) O(q)")
    return SheafClass("AtiyahTwist", {"q": _pt(q)})


def _evidence(pair: OperatorPair, pt: SupportPoint, tau) -> PointEvidence:
    res = gcd_with_trace(pair, pt.lam, pt.mu, tau)
    R = res.R
    ex = exponent_data(R) if R.order in (2, 3) else None
    return PointEvidence(pt, R.order, ex, R, list(res.checks))


LOCALLY_FREE_RANK2 = {"LineSum", "LineSquare", "AtiyahTwist", "B"}


def _cross_check(cls: SheafClass):
    ev = cls.evidence
    tag = cls.tag

    def fail(msg):
        raise ConsistencyError(f"{tag}: {msg}")

    if tag == "S_plus_S":
        if [e.gcd_order for e in ev] != [4]:
            fail(f"expected a single gcd of order 4, got {[e.gcd_order for e in ev]}")
        return
    if tag.startswith("Rank3"):
        for e in ev:
            if e.gcd_order != 3:
                fail(f"gcd order {e.gcd_order} at a support point, expected 3")
            if not e.exponents.c1_pole:
                fail("c1 regular at a support point")
        return
    for e in ev:
        sing = e.point.is_singular_point
        if tag in LOCALLY_FREE_RANK2 or (tag == "S_plus_Line" and not sing):
            if e.gcd_order != 2:
                fail(f"gcd order {e.gcd_order} at {e.point.coords}, expected 2")
            x = e.exponents
            if not x.c1_pole:
                fail("support point where c1 has no pole")
            pair = tuple(x.exponents)
            if x.indicial.irrational_exponents or pair not in ALLOWED_EXPONENTS:
                fail(f"exponents {pair} outside the allowed set")
            if (x.nu == 3) != (tag == "LineSquare"):
                fail(f"nu = {x.nu} does not match the verdict")
        else:
            if e.gcd_order != 3:
                fail(f"gcd order {e.gcd_order} at the singular point, expected 3")
    if tag in ("U_cuspidal", "U_plus", "U_minus") and len(ev) != 1:
        fail("indecomposable non-locally-free sheaf with more than one support point")


def classification_json(cls: SheafClass) -> dict:
    return {
        "curve": cls.curve.to_json() if cls.curve else None,
        "support": [p.to_json() for p in cls.support],
        "class": {"tag": cls.tag, "data": cls.data_json()},
        "torsion_descriptor": cls.torsion_descriptor,
        "decisions": list(cls.log),
        "evidence": [e.to_json() for e in cls.evidence],
    }
