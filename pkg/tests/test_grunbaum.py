import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from spectralsheaf.diffop import DiffOp, commutator, do_mul
from spectralsheaf.errors import IrregularC2, ValidationError
from spectralsheaf.grunbaum import (
    DegenerateSelfAdjoint,
    OperatorPair,
    build_degenerate,
    build_dixmier,
    build_fourier_dixmier,
    build_generic,
    build_not_locally_free,
    build_self_adjoint,
    build_wallenberg,
    generic_curve,
    poly_f,
    verify_pair,
    wallenberg_u,
)
from spectralsheaf.parser import parse_operator as P
from spectralsheaf.psdo import build_M
from spectralsheaf.series import LaurentSeries

from conftest import rationals


def curve_from_operators(pair):
    """Read g2, g3 off M^2 - 4L^3 = -g2 L - g3, independently of the closed forms."""
    L, M = pair.L, pair.M
    rest = do_mul(M, M) - do_mul(do_mul(L, L), L) * 4
    g2 = -rest.coeff(4).coeff(0)
    g3 = -(rest - L * (-g2)).coeff(0).coeff(0)
    return g2, g3


def test_example_operator():
    pair = build_generic(0, 0, 0, 0, poly_f([1]))
    assert pair.L == P("(d^2 - z^4/4)^2 + 2*d - z^2")
    rep = verify_pair(pair)
    assert rep.ok and rep.rank == 2


def test_not_locally_free_matches_generic():
    f = poly_f([1, 2, -1])
    for rho in (0, 1, mpq(-3, 2)):
        a = build_not_locally_free(rho, f)
        b = build_generic(0, rho, -mpq(rho) ** 2 / 6, 0, f)
        assert a.L == b.L
        assert (a.g2, a.g3) == (mpq(rho) ** 4 / 12, -mpq(rho) ** 6 / 216)


def test_not_locally_free_vanishing_pattern():
    build_not_locally_free(1, LaurentSeries(3, [1, 0, 0, 0, 1]))
    with pytest.raises(ValidationError):
        build_not_locally_free(1, LaurentSeries(2, [1]))


def test_dixmier_as_self_adjoint():
    for kappa in (0, 1, mpq(-2, 3)):
        sa = build_self_adjoint(8 * mpq(kappa), 0, poly_f([2]))
        dx = build_dixmier(kappa)
        assert sa.L == dx.L
        assert sa.M == dx.M * 2
        assert (sa.g2, sa.g3) == (0, 4 * mpq(kappa))


def test_irregular_c2():
    with pytest.raises(IrregularC2):
        build_self_adjoint(1, 0, poly_f([0, 1]))
    with pytest.raises(IrregularC2):
        build_generic(1, 0, 0, 0, poly_f([0, 1]))


def test_self_adjoint_cusp_pattern():
    # f = z^3 with K2 = K3 = 0 keeps c2 regular and the curve cuspidal
    pair = build_self_adjoint(0, 0, LaurentSeries(3, [1]))
    assert verify_pair(pair).ok
    assert (pair.g2, pair.g3) == (0, 0)


@pytest.mark.parametrize("tau", [0, 1, mpq(-5, 2)])
def test_interesting_family_curve(tau):
    assert generic_curve(0, 0, tau, 0) == (3 * mpq(tau) ** 2, mpq(tau) ** 3)


def test_curve_formulas_on_random_tuples():
    rng = random.Random(11)
    for _ in range(50):
        K = [mpq(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(4)]
        pair = build_generic(*K, poly_f([rng.choice([-2, -1, 1, 3])]))
        assert curve_from_operators(pair) == generic_curve(*K)


@settings(max_examples=10)
@given(rationals(), rationals(), st.lists(rationals(6, 3), min_size=0, max_size=2), rationals(6, 2, nonzero=True))
def test_self_adjoint_pairs_verify(K2, K3, tail, a1):
    f = LaurentSeries(0, [mpq(1), a1] + tail)
    pair = build_self_adjoint(K2, K3, f)
    rep = verify_pair(pair)
    assert rep.ok and rep.rank == 2
    assert curve_from_operators(pair) == (pair.g2, pair.g3)


def test_perturbed_c0_breaks_commutativity():
    pair = build_generic(1, 2, 3, 5, poly_f([1]))
    Lp = pair.L + DiffOp([poly_f([1])])  # shift K11 inside c0 only
    assert commutator(Lp, build_M(Lp)).order >= 0


def test_K14_shift_rebuilt_changes_only_the_curve():
    old = build_generic(1, 2, 3, 5, poly_f([1]))
    new = build_generic(1, 2, 3, 6, poly_f([1]))
    assert verify_pair(new).ok
    stale = OperatorPair(new.L, new.M, old.g2, old.g3, 2, None)
    rep = verify_pair(stale)
    assert rep.commutator_zero and not rep.relation_holds


def test_degenerate_case():
    pair = build_degenerate(LaurentSeries(0, [1, 2]), 2)
    rep = verify_pair(pair)
    assert rep.ok
    assert (pair.g2, pair.g3) == (12, 8)


def test_fourier_dixmier_rank_three():
    for kappa in (0, 1):
        rep = verify_pair(build_fourier_dixmier(kappa))
        assert rep.ok and rep.rank == 3 and rep.orders == (6, 9)


def test_wallenberg_cuspidal_closed_form():
    u = wallenberg_u(0, 0, 1, 2, 48)
    assert all(u.coeff(n) == n + 1 for n in range(48))
    rep = verify_pair(build_wallenberg(0, 0, 1, 2))
    assert rep.ok and rep.rank == 1
    assert rep.commutator_prec >= 48 and rep.relation_prec >= 48


def test_wallenberg_seed_checks():
    with pytest.raises(ValidationError):
        build_wallenberg(0, 0, 1, 1)
    with pytest.raises(ValidationError):
        build_wallenberg(4, 0, 1, 0)
