import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from spectralsheaf.diffop import DiffOp, do_mul
from spectralsheaf.errors import ParseError
from spectralsheaf.parser import parse_operator, parse_series
from spectralsheaf.series import LaurentSeries

z = DiffOp([LaurentSeries.monomial(mpq(1), 1)])
d = DiffOp.d()


def test_composition_not_commutative():
    assert parse_operator("d*z") == do_mul(d, z)
    assert parse_operator("d*z") - parse_operator("z*d") == DiffOp.scalar(1)


def test_powers_and_rationals():
    L = parse_operator("(d^2 + z^3 + 1)^2 + 2*z")
    base = do_mul(d, d) + do_mul(do_mul(z, z), z) + DiffOp.scalar(1)
    assert L == do_mul(base, base) + z * 2
    assert parse_series("z^4/4") == LaurentSeries.monomial(mpq(1, 4), 4)
    assert parse_series("3/4") == LaurentSeries.monomial(mpq(3, 4), 0)
    assert parse_operator("d**3") == parse_operator("d^3")


def test_negative_powers_of_series():
    s = parse_series("z^-2 + 1")
    assert s.val == -2 and s.coeff(-2) == 1 and s.coeff(0) == 1
    assert parse_series("1/(1 - z)", terms=6).coeff(5) == 1


def test_named_series():
    f = LaurentSeries(1, [mpq(1), mpq(0), mpq(2)])
    assert parse_series("f*f", {"f": f}).coeff(2) == 1
    assert parse_series("-f", {"f": f}).coeff(3) == -2


@pytest.mark.parametrize(
    "text, where",
    [
        ("1/0", (1, 2)),
        ("d^2 + ", (1, 7)),
        ("z $ 1", (1, 3)),
        ("(z + 1", (1, 7)),
        ("d/d", (1, 2)),
        ("d^-1", (1, 2)),
        ("q + 1", (1, 1)),
        ("", (1, 1)),
        ("z^x", (1, 3)),
    ],
)
def test_errors_carry_location(text, where):
    with pytest.raises(ParseError) as e:
        parse_operator(text)
    assert (e.value.line, e.value.col) == where


def test_multiline_location():
    with pytest.raises(ParseError) as e:
        parse_operator("d^2\n + ?")
    assert (e.value.line, e.value.col) == (2, 4)


def test_series_expected():
    with pytest.raises(ParseError):
        parse_series("d + z")


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=6))
def test_polynomials_round_trip(cs):
    text = " + ".join(f"({c})*z^{k}" for k, c in enumerate(cs))
    s = parse_series(text)
    for k, c in enumerate(cs):
        assert s.coeff(k) == c
