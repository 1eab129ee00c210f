import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stripdef import flags as fl
from stripdef import freegroup as fg
from stripdef import numcore as nc
from stripdef import posrep as pr

pos = st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_chevalley_generators_lie_in_so_J(n):
    J = fl.JForm(n).matrix(exact=True)
    for X in pr.root_data(n).generators:
        assert not np.any(X.T @ J + J @ X != 0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_semigroup_word_length(n):
    assert len(pr.semigroup_word(n)) == (2 * n - 1) ** 2


def test_exp_nilpotent_matches_series_oracle():
    X = nc.float_array(pr.chevalley_generator(1, 2))
    from math import factorial

    oracle = sum(np.linalg.matrix_power(X * 0.7, k) / factorial(k) for k in range(8))
    assert np.allclose(pr.exp_nilpotent(X, 0.7), oracle)


@pytest.mark.parametrize("n", [1, 2])
def test_sl_factorization_reproduces_element(n):
    params = [Fraction(k + 1, 3) for k in range((2 * n - 1) ** 2)]
    g = pr.positive_semigroup_element(n, params)
    factors = pr.sl_factorization(n, params)
    d = 4 * n - 1
    assert len(factors) == d * (d - 1) // 2
    assert pr.is_reduced_sl_word(d, [i for i, _ in factors])
    assert np.all(pr.sl_product(d, factors) == g.M)


def test_rank1_middle_entry_value():
    L = pr.lower_semigroup_element(1, [Fraction(1, 2)])
    U = pr.positive_semigroup_element(1, [Fraction(1, 2)]).M
    assert pr.middle_entry(L @ U) >= 1


@given(st.lists(pos, min_size=1, max_size=1), st.lists(pos, min_size=1, max_size=1))
def test_middle_entry_lower_times_upper_rank1(a, b):
    M = pr.lower_semigroup_element(1, a) @ pr.positive_semigroup_element(1, b).M
    assert pr.middle_entry(M) >= 1


def test_semigroup_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        pr.positive_semigroup_element(1, [0])


def test_certify_rejects_non_member():
    with pytest.raises(pr.CertificationError):
        pr.certify(nc.exact_array([[2, 0, 0], [0, 1, 0], [0, 0, 1]]), fl.JForm(1))


@pytest.mark.parametrize("n", [1, 2])
def test_sym_monomial_is_a_homomorphism(n):
    a = nc.exact_array([[2, 1], [1, 1]])
    b = nc.exact_array([[1, Fraction(1, 2)], [0, 1]])
    assert np.all(pr.sym_monomial(a @ b, n) == pr.sym_monomial(a, n) @ pr.sym_monomial(b, n))


@pytest.mark.parametrize("n", [1, 2])
def test_sym_representation_preserves_J(n):
    g = np.array([[1.3, 0.4], [0.2, (1 + 0.08) / 1.3]])
    assert fl.JForm(n).residual(pr.sym_representation(g, n).M) < 1e-12


def test_monomial_model_preserves_its_form():
    S = fg.example_rank2()
    rep = pr.build_representation(S, 2)
    m = rep.monomial
    for l in (1, -1, 2, -2):
        g = m.generator(l)
        assert np.all(g.T @ m.J @ g == m.J)


@pytest.mark.parametrize("n", [1, 2])
def test_veronese_equivariance_exact(n):
    rng = np.random.default_rng(n)
    S = fg.example_rank2()
    rep = pr.build_representation(S, n)
    for w in list(fg.enumerate_words(2, 3))[:40]:
        t = Fraction(int(rng.integers(-30, 30)), int(rng.integers(1, 9)))
        p = fg.mobius(S.matrix(w), fg.point(t))
        lhs = pr.veronese_flag_exact(t, n).transform(rep.monomial.matrix(w))
        assert lhs == pr.veronese_flag_exact(p, n)


def test_veronese_equivariance_float():
    rng = np.random.default_rng(0)
    S = fg.example_rank2()
    rep = pr.build_representation(S, 1)
    for w in list(fg.enumerate_words(2, 3))[:40]:
        t = rng.uniform(-3, 3)
        p = fg.mobius(nc.float_array(S.matrix(w)), fg.point(t))
        assert pr.veronese_flag(t, 1).transform(rep.matrix(w)) == pr.veronese_flag(p, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_veronese_quadruple_is_positive(n):
    flags = [pr.veronese_flag_exact(Fraction(k), n) for k in (0, 1, 2, 3)]
    assert fl.is_positive_tuple(flags)


@pytest.mark.parametrize("n", [1, 2])
def test_boundary_map_flag_ping_pong(n):
    S = fg.example_rank2()
    A = fg.dual_arc_system(S)
    rep = pr.build_representation(S, n)
    bmap = pr.build_boundary_map(rep, S, A)
    report = pr.verify_flag_ping_pong(rep, bmap, A)
    assert report.passed, report.violations


def test_arc_flag_prefix_equivariance():
    S = fg.example_rank2()
    A = fg.dual_arc_system(S)
    rep = pr.build_representation(S, 2)
    bmap = pr.build_boundary_map(rep, S, A)
    F = bmap.arc_flag(2, "plus", prefix=fg.Word("aB"))
    assert F == bmap.arc_flag(2, "plus").transform(rep.matrix(fg.Word("aB")))
    assert fl.is_isotropic_flag(F.as_float(), rep.J)


def test_representation_json_round_trip():
    S = fg.example_rank2()
    rep = pr.build_representation(S, 1)
    back = pr.representation_from_json(pr.representation_to_json(rep))
    for l in (1, 2):
        assert np.allclose(nc.float_array(back.generator(l)), nc.float_array(rep.generator(l)))
    assert back.monomial is not None


def test_translation_length_via_trace():
    S = fg.example_rank2()
    g = nc.float_array(S.matrix(fg.Word("ab")))
    assert fg.translation_length(g) == pytest.approx(2 * math.acosh(abs(np.trace(g)) / 2))
