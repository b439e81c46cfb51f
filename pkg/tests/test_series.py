import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from spectralsheaf.errors import InconclusivePrecision, PoleOrderExceeded, PrecisionExhausted
from spectralsheaf.series import INF, LaurentSeries, ls_invert, ls_mul, ls_residue, ls_sqrt

from conftest import rationals, small_coeffs


@st.composite
def series(draw, exact=None, maxlen=6):
    val = draw(st.integers(-3, 3))
    cs = draw(small_coeffs(maxlen))
    if exact is None:
        exact = draw(st.booleans())
    prec = INF if exact else val + len(cs) + draw(st.integers(0, 4))
    return LaurentSeries(val, cs, prec)


def test_zero_series_conventions():
    z = LaurentSeries.zero()
    assert z.is_exact_zero() and z.val == INF
    t = LaurentSeries(0, [0, 0], prec=5)
    assert t.is_known_zero() and not t.is_exact_zero() and t.val == 5


def test_product_precision():
    a = LaurentSeries(1, [1, 2], prec=4)
    b = LaurentSeries(-1, [1], prec=2)
    p = ls_mul(a, b)
    assert p.prec == min(4 - 1, 2 + 1)
    assert p.coeff(0) == 1


def test_coeff_beyond_precision():
    a = LaurentSeries(0, [1, 1], prec=2)
    with pytest.raises(PrecisionExhausted):
        a.coeff(2)


def test_inverse_geometric():
    inv = ls_invert(LaurentSeries(0, [1, -1]), terms=10)
    assert inv.prec == 10
    assert all(inv.coeff(k) == 1 for k in range(10))


def test_residue():
    s = LaurentSeries(-2, [3, mpq(-5, 2), 1])
    assert ls_residue(s) == mpq(-5, 2)


def test_pole_cap():
    with pytest.raises(PoleOrderExceeded):
        LaurentSeries(-65, [1])


def test_certify_zero():
    assert LaurentSeries(0, [], prec=20).certify_zero(16)
    with pytest.raises(InconclusivePrecision):
        LaurentSeries(0, [], prec=10).certify_zero(16)


@given(series(), series(), series())
def test_ring_laws(a, b, c):
    assert ((a + b) + c).agrees(a + (b + c))
    assert ls_mul(a, b).agrees(ls_mul(b, a))
    assert ls_mul(a, b + c).agrees(ls_mul(a, b) + ls_mul(a, c))
    assert ls_mul(ls_mul(a, b), c).agrees(ls_mul(a, ls_mul(b, c)))


@given(series().filter(lambda s: bool(s.coeffs)))
def test_inverse_property(a):
    prod = ls_mul(a, ls_invert(a, 12))
    assert prod.agrees(LaurentSeries.const(1))
    assert prod.prec >= min(a.prec - a.val, 12)


@given(series(), series())
def test_leibniz(a, b):
    lhs = ls_mul(a, b).derivative()
    rhs = ls_mul(a.derivative(), b) + ls_mul(a, b.derivative())
    assert lhs.agrees(rhs)


@given(series(exact=True))
def test_sqrt_of_square(a):
    sq = ls_mul(a, a)
    r = ls_sqrt(sq)
    assert ls_mul(r, r).agrees(sq)
    assert r == a or r == -a


@given(series())
def test_json_roundtrip(a):
    assert LaurentSeries.from_json(a.to_json()) == a


def test_sqrt_extension_and_odd_valuation():
    r = ls_sqrt(LaurentSeries(0, [2, 1]), terms=8)
    assert r.field.d == 2
    assert ls_mul(r, r).agrees(LaurentSeries(0, [2, 1]))
    with pytest.raises(ValueError):
        ls_sqrt(LaurentSeries(1, [1]))


@given(rationals(nonzero=True), st.integers(1, 5))
def test_geometric_powers(c, n):
    s = LaurentSeries(0, [1, -c])
    assert ls_mul(s ** n, ls_invert(s, 20) ** n).agrees(LaurentSeries.const(1))
