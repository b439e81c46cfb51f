import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from spectralsheaf.diffop import DiffOp, commutator
from spectralsheaf.errors import NotNormalized, PrecisionExhausted
from spectralsheaf.grunbaum import build_dixmier
from spectralsheaf.parser import parse_operator as P
from spectralsheaf.psdo import NEG_INF, PsdOp, build_M, build_M_via_fourth_root, gbinom, ps_mul, ps_pow, rth_root
from spectralsheaf.series import LaurentSeries

from conftest import small_coeffs


def test_gbinom_negative_upper():
    assert gbinom(-1, 3) == -1
    assert gbinom(-2, 2) == 3
    assert gbinom(5, 2) == 10


def test_inverse_of_d():
    dinv = PsdOp(-1, [LaurentSeries.const(1)], low=-10)
    d = PsdOp.from_diffop(DiffOp.d())
    one = ps_mul(d, dinv)
    assert one.coeff(0) == LaurentSeries.const(1)
    assert all(one.coeff(p).is_known_zero() for p in range(-1, one.low - 1, -1))


def test_dinv_times_z():
    # d^-1 z = z d^-1 - d^-2 + 2 d^-3 - ...
    dinv = PsdOp(-1, [LaurentSeries.const(1)], low=-8)
    z = PsdOp.from_diffop(DiffOp([LaurentSeries.monomial(mpq(1), 1)]))
    prod = ps_mul(dinv, z)
    assert prod.coeff(-1) == LaurentSeries.monomial(mpq(1), 1)
    assert prod.coeff(-2) == LaurentSeries.const(-1)
    assert prod.coeff(-3).is_known_zero()


def test_depth_is_respected():
    S = rth_root(P("d^4 + z*d^2"), 2, depth=6)
    with pytest.raises(PrecisionExhausted):
        S.coeff(2 - 7)


def test_rth_root_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        rth_root(P("d^4 + d^3"), 2)
    with pytest.raises(NotNormalized):
        rth_root(P("d^3 + z"), 2)


@st.composite
def quartics(draw):
    cs = [LaurentSeries(0, draw(small_coeffs(3))) for _ in range(3)]
    return DiffOp(cs + [LaurentSeries.zero(), LaurentSeries.const(1)])


@settings(max_examples=15)
@given(quartics())
def test_square_root_squares_back(L):
    S = rth_root(L, 2, depth=10)
    S2 = ps_mul(S, S)
    assert S2.agrees(PsdOp.from_diffop(L))


@settings(max_examples=10)
@given(quartics())
def test_two_routes_to_M_agree(L):
    assert build_M(L, 8) == build_M_via_fourth_root(L, 8)


@pytest.mark.parametrize("kappa", [0, 1, mpq(-2, 3)])
def test_dixmier_M_is_twice_Q(kappa):
    pair = build_dixmier(kappa)
    assert build_M(pair.L) == pair.M * 2


def test_build_M_commutes_for_square_of_second_order():
    # L = (d^2 + z)^2 lies in the centralizer of d^2 + z, so [L, M] = 0
    L = P("(d^2 + z)^2")
    assert commutator(L, build_M(L)).order < 0


def test_build_M_needs_depth():
    with pytest.raises(PrecisionExhausted):
        build_M(P("d^4"), depth=5)
