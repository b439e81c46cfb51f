import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from spectralsheaf.errors import InconclusivePrecision, ValidationError
from spectralsheaf.series import LaurentSeries
from spectralsheaf.torsmod import (
    E,
    I_t,
    M_theta,
    MatPair,
    NSHARP_FORM,
    N_FORM,
    TRIVIAL,
    canonical_pair,
    classify,
    classify_dim2,
    classify_dim3,
    decomposable,
    dual_form,
    dual_sheaf_label,
    ideal_normal_form,
    is_isomorphic,
    mat_add,
    matlis_dual,
    random_conjugate,
    sheaf_of_torsion3,
    zeros,
)

from conftest import rationals

FORMS = [M_theta(0), M_theta(2), M_theta(mpq(-1, 3)), N_FORM, NSHARP_FORM, I_t(0, 1), I_t(5, 1), I_t(1, 0)]




def test_case_one_theta_sign():
    J = mat_add(E(3, 1, 2), E(3, 2, 3))
    for th in (0, 1, mpq(7, 2)):
        assert classify_dim3(MatPair(J, E(3, 1, 3, th))) == M_theta(-th)


def test_case_two_forms():
    assert classify_dim3(MatPair(E(3, 1, 3), E(3, 2, 3))) == N_FORM
    assert classify_dim3(MatPair(E(3, 1, 3), E(3, 1, 2))) == NSHARP_FORM
    assert classify_dim3(MatPair(E(3, 1, 3), mat_add(E(3, 2, 3, 4), E(3, 1, 3, 9)))) == N_FORM


def test_decomposable_dim3():
    assert classify_dim3(MatPair(zeros(3), zeros(3))) == decomposable(TRIVIAL, TRIVIAL, TRIVIAL)
    assert classify_dim3(MatPair(zeros(3), E(3, 1, 2))) == decomposable(I_t(1, 0), TRIVIAL)
    assert classify_dim3(MatPair(E(3, 1, 3), E(3, 1, 3, 2))) == decomposable(I_t(2, 1), TRIVIAL)


def test_dim2_forms():
    assert classify_dim2(MatPair(E(2, 1, 2), E(2, 1, 2, 3))) == I_t(3, 1)
    assert classify_dim2(MatPair(zeros(2), E(2, 1, 2))) == I_t(1, 0)
    assert classify_dim2(MatPair(zeros(2), zeros(2))) == decomposable(TRIVIAL, TRIVIAL)


def test_annihilator_of_dim2_form():
    # I_(t0:t1) is killed by t0 x - t1 y with x = t^2, y = t^3
    for nf in (I_t(3, 1), I_t(1, 0), I_t(mpq(-2, 5), 1)):
        p = canonical_pair(nf)
        t0, t1 = nf.t
        ann = [[t0 * u - t1 * v for u, v in zip(ru, rv)] for ru, rv in zip(p.U, p.V)]
        assert all(x == 0 for r in ann for x in r)


def test_invariant_violations():
    with pytest.raises(ValidationError):
        classify_dim3(MatPair(E(3, 1, 2), E(3, 2, 1)))
    with pytest.raises(ValidationError):
        # V^2 != U^3
        classify_dim3(MatPair(zeros(3), mat_add(E(3, 1, 2), E(3, 2, 3))))
    with pytest.raises(ValidationError):
        classify(MatPair(zeros(4), zeros(4)))


@pytest.mark.parametrize("nf", FORMS, ids=str)
def test_conjugates_classify_back(nf):
    rng = random.Random(str(nf))
    p = canonical_pair(nf)
    for _ in range(25):
        assert classify(random_conjugate(p, rng)) == nf


@pytest.mark.parametrize("nf", FORMS, ids=str)
def test_canonical_pair_round_trip(nf):
    rng = random.Random(1)
    q = random_conjugate(canonical_pair(nf), rng)
    assert is_isomorphic(q, canonical_pair(classify(q)))


def test_matlis_duality():
    assert classify(matlis_dual(canonical_pair(N_FORM))) == NSHARP_FORM
    assert classify(matlis_dual(canonical_pair(NSHARP_FORM))) == N_FORM
    for th in (0, 3, mpq(-5, 7)):
        p = canonical_pair(M_theta(th))
        assert classify(matlis_dual(p)) == M_theta(th)
        assert is_isomorphic(matlis_dual(matlis_dual(p)), p)
    assert dual_form(N_FORM) == NSHARP_FORM


def test_isomorphism_negatives():
    assert not is_isomorphic(canonical_pair(N_FORM), canonical_pair(NSHARP_FORM))
    assert not is_isomorphic(canonical_pair(M_theta(1)), canonical_pair(M_theta(2)))
    assert not is_isomorphic(canonical_pair(I_t(1, 0)), canonical_pair(I_t(0, 1)))


@settings(max_examples=20)
@given(st.sampled_from(FORMS), st.sampled_from(FORMS), st.integers(0, 10**6))
def test_isomorphism_agrees_with_classification(a, b, seed):
    rng = random.Random(seed)
    pa, pb = random_conjugate(canonical_pair(a), rng), random_conjugate(canonical_pair(b), rng)
    if pa.n == pb.n:
        assert is_isomorphic(pa, pb) == (a == b)


def test_json_round_trip():
    p = canonical_pair(M_theta(mpq(3, 4)))
    assert MatPair.from_json(p.to_json()) == p


def T(*cs, start=2, prec=None):
    from spectralsheaf.series import INF

    return LaurentSeries(start, list(cs), INF if prec is None else prec)


def test_ideal_normal_forms():
    assert str(ideal_normal_form([T(1, 5)])) == "I(0, 5)"
    assert str(ideal_normal_form([T(1), T(1, start=3)])) == "J(0)"
    assert str(ideal_normal_form([T(1, 1, start=3), T(1, start=5)])) == "I(1, 1)"
    # t^4 - t^5 and t^5 together contain t^4 and t^5
    assert str(ideal_normal_form([T(1, -1, start=4), T(1, start=5)])) == "J(2)"


def membership_oracle(gens, m):
    """Brute force: is there an element of valuation m + 1 in the span of t^k g?"""
    import sympy as sp

    N = 2 * max(g.val for g in gens) + 6
    rows = []
    for g in gens:
        for k in [0] + list(range(2, N)):
            rows.append([sp.Rational(int(g.coeff(e - k).numerator), int(g.coeff(e - k).denominator)) if e - k >= g.val else 0 for e in range(N)])
    M = sp.Matrix(rows)
    # elements with vanishing coefficients below m + 1 and nonzero at m + 1
    sub = M[:, : m + 1]
    ns = sub.T.nullspace()
    return any((sp.Matrix(v).T * M[:, m + 1])[0] != 0 for v in ns)


@settings(max_examples=25)
@given(st.lists(st.tuples(st.integers(2, 6), st.lists(rationals(5, 2), min_size=1, max_size=4)), min_size=1, max_size=3))
def test_ideal_normal_form_matches_oracle(raw):
    gens = []
    for v, cs in raw:
        cs = [mpq(1)] + cs
        gens.append(LaurentSeries(v, cs))
    nf = ideal_normal_form(gens)
    m = nf.n + 2
    assert m == min(g.val for g in gens) or m < min(g.val for g in gens)
    assert (nf.tag == "J") == membership_oracle(gens, m)


def test_ideal_precision_and_validation():
    with pytest.raises(InconclusivePrecision):
        ideal_normal_form([T(1, 1, prec=4)])
    with pytest.raises(ValidationError):
        ideal_normal_form([LaurentSeries(1, [1])])


def test_rank_three_sheaves():
    s = sheaf_of_torsion3(M_theta(2))
    assert s["label"] == "E_q" and s["q_theta"] == ["2", "1", "8"]
    assert sheaf_of_torsion3(N_FORM)["label"] == "V"
    assert sheaf_of_torsion3(NSHARP_FORM)["label"] == "V_dagger"
    assert dual_sheaf_label(sheaf_of_torsion3(N_FORM)["label"]) == sheaf_of_torsion3(dual_form(N_FORM))["label"]
    assert sheaf_of_torsion3("smooth")["label"] == "AtiyahTwist3"
