import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from spectralsheaf.diffop import (
    DiffOp,
    act_right,
    commutator,
    do_apply,
    do_mul,
    indicial,
    make_monic,
    normalize_subleading,
    op_gcd,
    poly_roots,
    right_divide,
)
from spectralsheaf.errors import ConsistencyError, InconclusivePrecision, NotNormalized
from spectralsheaf.parser import parse_operator as P
from spectralsheaf.scalars import QuadNumber
from spectralsheaf.series import LaurentSeries

from conftest import rationals, small_coeffs

Z = LaurentSeries.monomial(mpq(1), 1)


@st.composite
def poly_ops(draw, max_order=3):
    n = draw(st.integers(0, max_order))
    cs = [LaurentSeries(0, draw(small_coeffs(3))) for _ in range(n + 1)]
    return DiffOp(cs)


@st.composite
def polys(draw):
    return LaurentSeries(0, draw(small_coeffs(5)))


def test_weyl_relation():
    d, z = DiffOp.d(), DiffOp([Z])
    assert commutator(d, z) == DiffOp.scalar(1)
    assert P("d*z") == P("z*d + 1")


def test_zero_top_coefficients_are_stripped():
    op = DiffOp([LaurentSeries.const(1), LaurentSeries.zero()])
    assert len(op.coeffs) == 1
    phantom = DiffOp([LaurentSeries.const(1), LaurentSeries(0, [], prec=20)])
    assert phantom.order == 0 and len(phantom.coeffs) == 2
    assert len(phantom.certified(16).coeffs) == 1
    with pytest.raises(InconclusivePrecision):
        DiffOp([LaurentSeries.const(1), LaurentSeries(0, [], prec=5)]).certified(16)


@given(poly_ops(), poly_ops(), polys())
def test_composition_matches_application(A, B, g):
    assert do_apply(do_mul(A, B), g) == do_apply(A, do_apply(B, g))


@given(poly_ops(), poly_ops(), poly_ops())
def test_associative(A, B, C):
    assert do_mul(do_mul(A, B), C) == do_mul(A, do_mul(B, C))


@given(poly_ops(4), poly_ops(2).filter(lambda b: b.order >= 0))
def test_right_division_identity(A, B):
    Q, R = right_divide(A, B, terms=30)
    assert R.order < B.order
    assert (do_mul(Q, B) + R).agrees(A)


def test_gcd_of_common_right_factor():
    G = P("d^2 + z*d + 1")
    A = do_mul(P("d + z^2"), G)
    B = do_mul(P("d^2 - 3"), G)
    trace = []
    R = op_gcd(A, B, trace=trace)
    assert R.agrees(G)
    assert trace and trace[-1].order < 0


def test_make_monic_is_exactly_monic():
    R = make_monic(P("(1 + z)*d^2 + d"), terms=20)
    assert R.lc() == LaurentSeries.const(1)


def test_act_right():
    p = P("d^3 + 2*d")
    assert act_right(p, "d") == P("d^4 + 2*d^2")
    assert act_right(p, "z") == P("3*d^2 + 2")


def test_euler_operator_exponents():
    data = indicial(P("d^2 - 1/z*d"))
    assert data.regular_singular
    assert data.exponents == [0, 2]


def test_irregular_singular():
    assert not indicial(P("d^2 + z^-3")).regular_singular


def test_indicial_needs_monic():
    with pytest.raises(NotNormalized):
        indicial(P("2*d^2"))


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=4))
def test_indicial_of_euler_products(roots):
    # prod (z d - r) has indicial polynomial prod (x - r); divide by z^n to make it monic
    op = DiffOp.scalar(1)
    for r in roots:
        op = do_mul(op, P(f"z*d - ({r})"))
    n = len(roots)
    R = op.left_scale(LaurentSeries.monomial(mpq(1), -n))
    assert indicial(R).exponents == sorted(mpq(r) for r in roots)


def test_poly_roots_quadratic_extension():
    roots, irr = poly_roots([mpq(1), mpq(0), mpq(1)])
    assert irr and set(roots) == {QuadNumber(0, 1, -1), QuadNumber(0, -1, -1)}
    roots, irr = poly_roots([mpq(-6), mpq(11), mpq(-6), mpq(1)])
    assert roots == [1, 2, 3] and not irr


@given(poly_ops(3).filter(lambda p: p.order >= 1), rationals())
def test_normalize_subleading(p, c):
    monic = DiffOp(list(p.coeffs[: p.order]) + [LaurentSeries.const(1)])
    out, v = normalize_subleading(monic)
    assert out.order == monic.order
    assert out.coeff(out.order - 1).is_known_zero()


def test_division_with_truncated_divisor_is_inconclusive():
    A = P("d^3")
    B = DiffOp([LaurentSeries.const(1), LaurentSeries(0, [1], prec=1)])
    with pytest.raises(InconclusivePrecision):
        right_divide(A, B, terms=10)
