import pytest
from gmpy2 import mpq
from hypothesis import given

from spectralsheaf.errors import IrrationalSupport, ParseError
from spectralsheaf.scalars import (
    QQ,
    QuadNumber,
    QuadraticField,
    fmt_scalar,
    join_fields,
    parse_rational,
    parse_scalar,
    quad_sqrt,
    rational_sqrt,
    squarefree_part,
)

from conftest import rationals


def test_parse_rational():
    assert parse_rational("-3/6") == mpq(-1, 2)
    assert parse_rational(" 7 ") == 7
    with pytest.raises(ParseError):
        parse_rational("1/0")
    with pytest.raises(ParseError):
        parse_rational("1.5")


def test_squarefree_part():
    assert squarefree_part(mpq(-12, 5)) == (-15, mpq(2, 5))
    d, r = squarefree_part(mpq(18))
    assert (d, r) == (2, 3)


def test_sqrt_opens_extension():
    F, r = QQ.sqrt(mpq(-4))
    assert F == QuadraticField(-1)
    assert r == QuadNumber(0, 2, -1)
    assert r * r == -4
    assert QQ.sqrt(mpq(9, 4)) == (QQ, mpq(3, 2))


def test_two_extensions_rejected():
    with pytest.raises(IrrationalSupport):
        join_fields(QuadraticField(2), QuadraticField(3))
    with pytest.raises(IrrationalSupport):
        QuadNumber(1, 1, 2) + QuadNumber(1, 1, 3)


@given(rationals(), rationals(), rationals(), rationals())
def test_quadratic_field_axioms(a, b, c, e):
    x, y = QuadNumber(a, b, -3), QuadNumber(c, e, -3)
    assert (x + y) - y == x
    assert x * y == y * x
    if x:
        assert (x * y) / x == y
        assert x * x.inverse() == 1


@given(rationals(), rationals())
def test_quad_sqrt_roundtrip(a, b):
    x = QuadNumber(a, b, 5)
    r = quad_sqrt(x * x)
    assert r is not None and r * r == x * x


@given(rationals(num=50, den=50))
def test_rational_sqrt(x):
    r = rational_sqrt(x * x)
    assert r == abs(x)


@given(rationals(), rationals())
def test_format_roundtrip(a, b):
    for v in (a, QuadNumber(a, b, -7)):
        assert parse_scalar(fmt_scalar(v)) == v
