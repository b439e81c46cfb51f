"""Finite-length modules over the cuspidal local ring k[[t^2, t^3]] as commuting nilpotent pairs.

A module of dimension n is a pair (U, V) of n x n matrices with UV = VU and
V^2 = U^3; U is the action of t^2 and V the action of t^3.  Only lengths up to
three are classified (the category is wild beyond that).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq
from sympy import QQ as SQQ
from sympy.polys.matrices import DomainMatrix

from .errors import InconclusivePrecision, ValidationError
from .scalars import fmt_rational, parse_rational
from .series import INF, LaurentSeries

Matrix = tuple  # tuple of row tuples of mpq


def _mat(rows) -> Matrix:
    return tuple(tuple(mpq(x) if not isinstance(x, str) else parse_rational(x) for x in r) for r in rows)


def _dm(A: Matrix) -> DomainMatrix:
    n = len(A)
    m = len(A[0]) if n else 0
    return DomainMatrix([list(r) for r in A], (n, m), SQQ)


def _back(D: DomainMatrix) -> Matrix:
    return tuple(tuple(mpq(x) for x in r) for r in D.to_list())


def zeros(n) -> Matrix:
    return tuple(tuple(mpq(0) for _ in range(n)) for _ in range(n))


def E(n, i, j, c=1) -> Matrix:
    """c times the matrix unit at (i, j), 1-based."""
    return tuple(tuple(mpq(c) if (r, s) == (i - 1, j - 1) else mpq(0) for s in range(n)) for r in range(n))


def mat_add(A, B):
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_mul(A, B):
    cols = list(zip(*B))
    return tuple(tuple(sum((a * b for a, b in zip(r, c)), mpq(0)) for c in cols) for r in A)


def transpose(A):
    return tuple(zip(*A)) if A else A


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    return _dm(A).rank()


def is_zero(A) -> bool:
    return all(x == 0 for r in A for x in r)


@dataclass(frozen=True)
class MatPair:
    U: Matrix
    V: Matrix

    @property
    def n(self) -> int:
        return len(self.U)

    def __post_init__(self):
        object.__setattr__(self, "U", _mat(self.U))
        object.__setattr__(self, "V", _mat(self.V))

    def check(self, relation: bool = True):
        n = self.n
        if any(len(r) != n for r in self.U + self.V) or len(self.V) != n:
            raise ValidationError("U and V must be square of the same size")
        if mat_mul(self.U, self.V) != mat_mul(self.V, self.U):
            raise ValidationError("U and V do not commute")
        if relation and mat_mul(self.V, self.V) != mat_mul(mat_mul(self.U, self.U), self.U):
            raise ValidationError("the cuspidal relation V^2 = U^3 fails")
        for A in (self.U, self.V):
            P = A
            for _ in range(n):
                P = mat_mul(P, A)
            if n and not is_zero(P):
                raise ValidationError("U and V must be nilpotent")
        return self

    def conjugate(self, S: Matrix) -> "MatPair":
        Si = _back(_dm(S).inv())
        return MatPair(mat_mul(mat_mul(S, self.U), Si), mat_mul(mat_mul(S, self.V), Si))

    def to_json(self):
        enc = lambda A: [[fmt_rational(x) for x in r] for r in A]  # noqa: E731
        return {"n": self.n, "U": enc(self.U), "V": enc(self.V)}

    @classmethod
    def from_json(cls, d) -> "MatPair":
        p = cls(d["U"], d["V"])
        if "n" in d and int(d["n"]) != p.n:
            raise ValidationError(f"declared n = {d['n']} but matrices have size {p.n}")
        return p


def block_diag(pairs: Sequence[MatPair]) -> MatPair:
    n = sum(p.n for p in pairs)
    U = [[mpq(0)] * n for _ in range(n)]
    V = [[mpq(0)] * n for _ in range(n)]
    o = 0
    for p in pairs:
        for i in range(p.n):
            for j in range(p.n):
                U[o + i][o + j] = p.U[i][j]
                V[o + i][o + j] = p.V[i][j]
        o += p.n
    return MatPair(U, V)


# ---------------------------------------------------------------- normal forms


@dataclass(frozen=True)
class NormalForm:
    """tag is one of Dim3_M, Dim3_N, Dim3_NSharp, Dim2_I, Trivial1, Decomposable.

    Dim3_M carries theta (the module R/(t^3 + theta t^4)); Dim2_I carries the
    point t = (t0 : t1) of P^1, the annihilator being m^2 + (t0 x - t1 y);
    Decomposable carries its summands sorted.
    """

    tag: str
    theta: Optional[object] = None
    t: Optional[tuple] = None
    summands: tuple = ()

    @property
    def dim(self) -> int:
        return {"Dim3_M": 3, "Dim3_N": 3, "Dim3_NSharp": 3, "Dim2_I": 2, "Trivial1": 1}.get(self.tag) or sum(
            s.dim for s in self.summands
        )

    def to_json(self):
        out = {"tag": self.tag}
        if self.theta is not None:
            out["theta"] = fmt_rational(self.theta)
        if self.t is not None:
            out["t"] = [fmt_rational(x) for x in self.t]
        if self.summands:
            out["summands"] = [s.to_json() for s in self.summands]
        return out

    def __str__(self):
        if self.tag == "Dim3_M":
            return f"M_{fmt_rational(self.theta)}"
        if self.tag == "Dim2_I":
            return f"I_({fmt_rational(self.t[0])}:{fmt_rational(self.t[1])})"
        if self.tag == "Decomposable":
            return " + ".join(str(s) for s in self.summands)
        return {"Dim3_N": "N", "Dim3_NSharp": "N#", "Trivial1": "k"}[self.tag]


TRIVIAL = NormalForm("Trivial1")


def M_theta(theta) -> NormalForm:
    return NormalForm("Dim3_M", theta=mpq(theta))


def I_t(t0, t1) -> NormalForm:
    t0, t1 = mpq(t0), mpq(t1)
    if t1:
        return NormalForm("Dim2_I", t=(t0 / t1, mpq(1)))
    if not t0:
        raise ValidationError("(0 : 0) is not a point of P^1")
    return NormalForm("Dim2_I", t=(mpq(1), mpq(0)))


def decomposable(*parts: NormalForm) -> NormalForm:
    flat = []
    for p in parts:
        flat.extend(p.summands if p.tag == "Decomposable" else [p])
    flat.sort(key=lambda s: (-s.dim, s.tag, str(s)))
    return NormalForm("Decomposable", summands=tuple(flat))


N_FORM = NormalForm("Dim3_N")
NSHARP_FORM = NormalForm("Dim3_NSharp")


def canonical_pair(nf: NormalForm) -> MatPair:
    if nf.tag == "Dim3_M":
        # basis t^4, t^2, 1 of R/(t^3 + theta t^4)
        return MatPair(mat_add(E(3, 1, 2), E(3, 2, 3)), E(3, 1, 3, -nf.theta))
    if nf.tag == "Dim3_N":
        return MatPair(E(3, 1, 3), E(3, 2, 3))
    if nf.tag == "Dim3_NSharp":
        return MatPair(E(3, 1, 3), E(3, 1, 2))
    if nf.tag == "Dim2_I":
        t0, t1 = nf.t
        if t1:
            return MatPair(E(2, 1, 2), E(2, 1, 2, t0 / t1))
        return MatPair(zeros(2), E(2, 1, 2))
    if nf.tag == "Trivial1":
        return MatPair(zeros(1), zeros(1))
    return block_diag([canonical_pair(s) for s in nf.summands])


def _top_dim(p: MatPair) -> int:
    """dim M / mM with m = (U, V)."""
    n = p.n
    return n - rank(tuple(ru + rv for ru, rv in zip(p.U, p.V)))


def _socle_dim(p: MatPair) -> int:
    return p.n - rank(p.U + p.V)


def _ratio(A, B):
    """c with A = c B for nonzero B, else None."""
    c = None
    for ra, rb in zip(A, B):
        for a, b in zip(ra, rb):
            if b:
                c = a / b
                break
        if c is not None:
            break
    if c is None:
        return None
    if all(a == c * b for ra, rb in zip(A, B) for a, b in zip(ra, rb)):
        return c
    return None


def classify_dim2(pair: MatPair) -> NormalForm:
    if pair.n != 2:
        raise ValidationError("classify_dim2 needs a 2 x 2 pair")
    pair.check()
    U, V = pair.U, pair.V
    if is_zero(U) and is_zero(V):
        return decomposable(TRIVIAL, TRIVIAL)
    if is_zero(U):
        return I_t(1, 0)
    c = _ratio(V, U)
    if c is None:
        raise ValidationError("commuting nilpotent 2 x 2 matrices must be proportional")
    # (U, V) = (N, cN): the annihilator contains c x - y
    return I_t(c, 1)


def classify_dim3(pair: MatPair) -> NormalForm:
    if pair.n != 3:
        raise ValidationError("classify_dim3 needs a 3 x 3 pair")
    pair.check()
    U, V = pair.U, pair.V
    r = rank(U)
    if r == 2:
        # V commutes with the regular nilpotent U and V^2 = 0, so V = c U^2
        c = _ratio(V, mat_mul(U, U)) if not is_zero(V) else mpq(0)
        if c is None:
            raise ValidationError("V is not a multiple of U^2 although U is regular")
        return M_theta(-c)
    if r == 1:
        top, soc = _top_dim(pair), _socle_dim(pair)
        if (top, soc) == (1, 2):
            return N_FORM
        if (top, soc) == (2, 1):
            return NSHARP_FORM
        c = _ratio(V, U)
        if (top, soc) != (2, 2) or c is None:
            raise ValidationError(f"unexpected top/socle dimensions {(top, soc)}")
        return decomposable(I_t(c, 1), TRIVIAL)
    if is_zero(V):
        return decomposable(TRIVIAL, TRIVIAL, TRIVIAL)
    return decomposable(I_t(1, 0), TRIVIAL)


def classify(pair: MatPair) -> NormalForm:
    n = pair.n
    if n == 1:
        pair.check()
        return TRIVIAL
    if n == 2:
        return classify_dim2(pair)
    if n == 3:
        return classify_dim3(pair)
    raise ValidationError(f"length {n} modules are not classified (the category is wild); lengths 1 to 3 only")


def matlis_dual(pair: MatPair) -> MatPair:
    return MatPair(transpose(pair.U), transpose(pair.V))


def dual_form(nf: NormalForm) -> NormalForm:
    if nf.tag == "Dim3_N":
        return NSHARP_FORM
    if nf.tag == "Dim3_NSharp":
        return N_FORM
    if nf.tag == "Decomposable":
        return decomposable(*(dual_form(s) for s in nf.summands))
    return nf


# ---------------------------------------------------------------- isomorphism


def _intertwiner_space(a: MatPair, b: MatPair) -> list:
    """Basis of {S : S U_a = U_b S, S V_a = V_b S} as n x n matrices."""
    n = a.n
    rows = []
    for A, B in ((a.U, b.U), (a.V, b.V)):
        # (S A - B S)_{ij} = sum_k S_ik A_kj - B_ik S_kj, unknown S_pq at index p n + q
        for i in range(n):
            for j in range(n):
                row = [mpq(0)] * (n * n)
                for k in range(n):
                    row[i * n + k] += A[k][j]
                    row[k * n + j] -= B[i][k]
                rows.append(row)
    ns = _dm(tuple(tuple(r) for r in rows)).nullspace().to_list()
    return [tuple(tuple(mpq(v[p * n + q]) for q in range(n)) for p in range(n)) for v in ns]


def is_isomorphic(a: MatPair, b: MatPair, rng: random.Random | None = None, tries: int = 8) -> bool:
    if a.n != b.n:
        return False
    n = a.n
    if n == 0:
        return True
    basis = _intertwiner_space(a, b)
    if not basis:
        return False
    rng = rng or random.Random(0)
    for _ in range(tries):
        S = zeros(n)
        for B in basis:
            c = rng.randint(-50, 50)
            S = mat_add(S, tuple(tuple(c * x for x in r) for r in B))
        if _dm(S).det() != 0:
            return True
    # random search failed: test the determinant polynomial for identical vanishing
    import sympy

    xs = sympy.symbols(f"s0:{len(basis)}")
    S = sympy.zeros(n, n)
    for x, B in zip(xs, basis):
        S += x * sympy.Matrix([[sympy.Rational(int(v.numerator), int(v.denominator)) for v in r] for r in B])
    return sympy.expand(S.det()) != 0


# ---------------------------------------------------------------- ideals of k[[t^2, t^3]]


@dataclass(frozen=True)
class IdealNF:
    """I(n, theta) = <t^n (t^2 + theta t^3)> or J(n) = t^n <t^2, t^3>."""

    tag: str
    n: int
    theta: Optional[object] = None

    def to_json(self):
        out = {"tag": self.tag, "n": self.n}
        if self.theta is not None:
            out["theta"] = fmt_rational(self.theta)
        return out

    def __str__(self):
        if self.tag == "I":
            return f"I({self.n}, {fmt_rational(self.theta)})"
        return f"J({self.n})"


def ideal_normal_form(gens: Sequence[LaurentSeries]) -> IdealNF:
    """Normal form of the ideal generated by `gens` in k[[t^2, t^3]] (series in t)."""
    gens = [g for g in gens if not g.is_exact_zero()]
    if not gens:
        raise ValidationError("the zero ideal has no normal form here")
    for g in gens:
        if g.coeffs and g.val < 0:
            raise ValidationError("generators must be power series")
        if g.coeff(0) or g.coeff(1):
            raise ValidationError("generators must lie in the maximal ideal of k[[t^2, t^3]]")
        if not g.coeffs:
            raise InconclusivePrecision("a generator is zero up to its precision")
    vmax = max(g.val for g in gens)
    need = 2 * vmax + 4
    N = min(g.prec for g in gens)
    if N < need:
        raise InconclusivePrecision(f"generators known to t^{N - 1}; need at least t^{need - 1}")
    N = need if N == INF else int(N)
    # k-span of t^k g, k in {0, 2, 3, ...}, truncated below t^N
    rows = []
    for g in gens:
        for k in [0] + list(range(2, N)):
            if g.val + k >= N:
                break
            row = [mpq(0)] * N
            for e in range(g.val, N - k):
                row[e + k] = mpq(g.coeff(e))
            rows.append(row)
    red = _dm(tuple(tuple(r) for r in rows)).rref()[0].to_list()
    pivots = {}
    for r in red:
        for e, x in enumerate(r):
            if x:
                pivots[e] = [mpq(y) / mpq(x) for y in r]
                break
    m = min(pivots)
    if m + 1 >= N:
        raise InconclusivePrecision("truncation too short to decide membership")
    if m + 1 in pivots:
        return IdealNF("J", m - 2)
    return IdealNF("I", m - 2, pivots[m][m + 1])


# ---------------------------------------------------------------- rank-three sheaves


def sheaf_of_torsion3(nf: NormalForm | str) -> dict:
    """Label of the rank-three semi-stable sheaf whose torsion module is nf.

    A plain string "smooth" stands for a length-three torsion module supported at a
    smooth point q, whose sheaf is O(q) (x) A_3.
    """
    if nf == "smooth":
        return {"label": "AtiyahTwist3", "text": "O([q]) (x) A_3"}
    if nf.tag == "Dim3_M":
        th = nf.theta
        return {
            "label": "E_q",
            "theta": fmt_rational(th),
            "q_theta": [fmt_rational(th), "1", fmt_rational(th**3)],
            "locally_free": True,
        }
    if nf.tag == "Dim3_N":
        return {"label": "V", "locally_free": False}
    if nf.tag == "Dim3_NSharp":
        return {"label": "V_dagger", "locally_free": False}
    raise ValidationError(f"{nf} is not an indecomposable length-three module")


def dual_sheaf_label(label: str) -> str:
    return {"V": "V_dagger", "V_dagger": "V"}.get(label, label)


def random_conjugate(pair: MatPair, rng: random.Random, bound: int = 5) -> MatPair:
    n = pair.n
    while True:
        S = tuple(tuple(mpq(rng.randint(-bound, bound)) for _ in range(n)) for _ in range(n))
        if _dm(S).det() != 0:
            return pair.conjugate(S)
