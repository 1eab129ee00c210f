from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stripdef import flags as fl
from stripdef import numcore as nc
from stripdef import posrep as pr


def test_form_matrix_entries():
    J = fl.JForm(1).matrix(exact=True)
    assert J.tolist() == [[0, 0, -1], [0, 1, 0], [-1, 0, 0]]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_form_signature(n):
    ev = np.linalg.eigvalsh(fl.JForm(n).matrix())
    assert (ev > 0).sum() == 2 * n and (ev < 0).sum() == 2 * n - 1


def test_flag_validation():
    with pytest.raises(fl.FlagError):
        fl.OrientedFlag(nc.identity(4, exact=True))
    B = nc.identity(3, exact=True)
    B[:, 0] = -B[:, 0]
    with pytest.raises(fl.FlagError):
        fl.OrientedFlag(B)


def test_same_flag_under_triangular_change():
    rng = np.random.default_rng(1)
    B = rng.normal(size=(5, 5))
    if np.linalg.det(B) < 0:
        B[:, 0] *= -1
    T = np.triu(rng.normal(size=(5, 5)))
    np.fill_diagonal(T, rng.uniform(0.5, 2, size=5))
    assert fl.OrientedFlag(B) == fl.OrientedFlag(B @ T)
    swapped = B[:, [1, 0, 2, 3, 4]].copy()
    swapped[:, 0] *= -1
    assert not fl.OrientedFlag(B) == fl.OrientedFlag(swapped)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_standard_pair_is_transverse(d):
    F, G = fl.flag_pair(nc.identity(d, exact=True))
    assert fl.is_oriented_transverse(F, G)
    assert fl.is_oriented_transverse(G, F)
    assert not fl.is_oriented_transverse(F, F)


@pytest.mark.parametrize("d", [3, 5])
def test_interval_flags_are_positive(d):
    rng = np.random.default_rng(d)
    F, G = fl.flag_pair(nc.identity(d, exact=True))
    for _ in range(20):
        X = fl.OrientedFlag(fl.lower_unipotent_tp(d, rng, exact=True))
        assert fl.in_interval(X, F, G)
        assert not fl.in_interval(X, G, F)


def test_cyclic_axioms_d7_exact():
    rng = np.random.default_rng(7)
    F, G = fl.flag_pair(nc.identity(7, exact=True))
    for _ in range(5):
        X = fl.OrientedFlag(fl.lower_unipotent_tp(7, rng, exact=True))
        assert fl.is_positive_triple(F, X, G)
        assert fl.is_positive_triple(X, G, F)
        assert not fl.is_positive_triple(G, X, F)


def test_intersection_basis_recovers_basis():
    rng = np.random.default_rng(3)
    E = rng.normal(size=(5, 5))
    if np.linalg.det(E) < 0:
        E[:, 0] *= -1
    F, G = fl.flag_pair(E)
    B = fl.intersection_basis(F, G)
    ratios = B / E
    assert np.allclose(ratios, ratios[0], rtol=1e-9)
    assert np.all(ratios[0] > 0)


@pytest.mark.parametrize("n", [1, 2])
def test_adapted_J_basis_on_veronese_pair(n):
    J = fl.JForm(n)
    F, G = pr.veronese_flag(0.3, n), pr.veronese_flag(2.5, n)
    pair = fl.adapted_J_basis(F, G, J)
    assert J.residual(pair.E) < 1e-9
    assert pair.F == F and pair.F_hat == G
    x0 = pair.neutral
    assert J.dot(x0, x0) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2])
def test_veronese_flags_are_isotropic(n):
    J = fl.JForm(n)
    for t in (0.0, 1.0, -3.0, 7.5):
        assert fl.is_isotropic_flag(pr.veronese_flag(t, n), J)
    # exact flags live in monomial coordinates
    F = pr.veronese_flag_exact(Fraction(3, 7), n)
    assert fl.is_isotropic_flag(fl.OrientedFlag(pr.monomial_to_weight(n) @ nc.float_array(F.basis)), J)
    assert pr.veronese_flag(3 / 7, n) == fl.OrientedFlag(pr.monomial_to_weight(n) @ nc.float_array(F.basis))


def test_generic_flag_is_not_isotropic():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(3, 3))
    if np.linalg.det(B) < 0:
        B[:, 0] *= -1
    assert not fl.is_isotropic_flag(fl.OrientedFlag(B), fl.JForm(1))


def test_neutral_functional_reads_middle_coordinate():
    n = 2
    J = fl.JForm(n)
    F, G = pr.veronese_flag(0.0, n), pr.veronese_flag(1.0, n)
    pair = fl.adapted_J_basis(F, G, J)
    v = pair.E @ np.arange(1.0, 8.0)
    assert fl.neutral_functional(F, G, v, J) == pytest.approx(4.0)


def test_random_isotropic_flag_in_interval():
    n = 2
    J = fl.JForm(n)
    F, G = pr.veronese_flag(0.0, n), pr.veronese_flag(2.0, n)
    X = fl.random_flag_in_interval(F, G, seed=4, J=J)
    assert fl.is_isotropic_flag(X, J)
    assert fl.in_interval(X, F, G)


@given(st.floats(-5, 5), st.floats(0.2, 3))
def test_positive_triples_of_veronese_points(t, gap):
    F, X, G = (pr.veronese_flag(t + k * gap, 1) for k in range(3))
    assert fl.is_positive_triple(F, X, G)


def test_json_round_trip():
    F = pr.veronese_flag_exact(Fraction(1, 2), 2)
    assert fl.flag_from_json(fl.flag_to_json(F)) == F
