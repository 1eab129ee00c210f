from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stripdef import cocycle as cc
from stripdef import freegroup as fg
from stripdef import numcore as nc

words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=5).map(fg.Word)


def _zero(v):
    return all(x == 0 for x in v)


def test_crossing_sum_matches_recursion_exact(ctx):
    for w in fg.enumerate_words(2, 4):
        assert _zero(cc.cocycle_eval(w, ctx.av, exact=True) - ctx.deformation.u(w, exact=True))


def test_crossing_sum_matches_recursion_float(ctx1):
    for w in fg.enumerate_words(2, 3):
        assert np.allclose(cc.cocycle_eval(w, ctx1.av), ctx1.deformation.u(w), atol=1e-10)


@given(words, words)
def test_cocycle_identity_exact(w1, w2):
    from conftest import context

    assert _zero(cc.cocycle_identity_residual(w1, w2, context(2).deformation, exact=True))


def test_generator_values_are_strips(ctx):
    # u(g_i) = v+ - v- on the wall a_{i,+}
    for i in (1, 2):
        assert _zero(ctx.deformation.u(fg.Word([i]), exact=True) - ctx.av.strip(i, exact=True))


def test_inverse_generator_value(ctx1):
    D, rep = ctx1.deformation, ctx1.rep
    for i in (1, 2):
        lhs = D.u(fg.Word([-i]), exact=True)
        rhs = -(rep.monomial.generator(-i) @ D.u(fg.Word([i]), exact=True))
        assert _zero(lhs - rhs)


def test_arc_vectors_lie_on_flag_lines(ctx):
    for l in ctx.A.letters():
        for end, vec in (("plus", ctx.av.plus[l]), ("minus", ctx.av.minus[l])):
            line = nc.float_array(ctx.bmap.arc_flag(l, end).as_float().line())
            v = nc.float_array(vec)
            cos = v @ line / (np.linalg.norm(v) * np.linalg.norm(line))
            assert cos == pytest.approx(1.0, abs=1e-9)


def test_base_arc_vectors_have_unit_length(ctx):
    for i in (1, 2):
        assert np.linalg.norm(ctx.av.plus[i]) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(ctx.av.minus[i]) == pytest.approx(1.0, abs=1e-12)


def test_coboundary_values(ctx1):
    v = np.array([0.3, -1.0, 2.0])
    D = cc.coboundary(ctx1.rep, v)
    for w in list(fg.enumerate_words(2, 3))[:20]:
        assert np.allclose(D.u(w), v - ctx1.rep.matrix(w) @ v)


def test_tilde_u_base_and_prefix(ctx1):
    av, D, rep = ctx1.av, ctx1.deformation, ctx1.rep
    for l in (1, -1, 2, -2):
        sign = 1 if l > 0 else -1
        vp, vm = av.vectors(l, exact=True)
        assert _zero(cc.tilde_u((), l, av, exact=True) - Fraction(1, 2) * sign * (vp - vm))
    prefix = fg.Word("ab")
    lhs = cc.tilde_u(prefix, 2, av, exact=True)
    rhs = D.u(prefix, exact=True) + rep.monomial.matrix(prefix) @ cc.tilde_u((), 2, av, exact=True)
    assert _zero(lhs - rhs)


def test_tilde_u_rejects_wall_behind_tile(ctx1):
    with pytest.raises(ValueError):
        cc.tilde_u(fg.Word("a"), -1, ctx1.av)


def test_side_pairing_translation(ctx):
    """u(g_i) + rho(g_i) tilde_u(a_{i,-}) = tilde_u(a_{i,+})."""
    av, D, rep = ctx.av, ctx.deformation, ctx.rep
    for i in (1, 2):
        lhs = D.u(fg.Word([i]), exact=True) + rep.monomial.generator(i) @ cc.tilde_u((), -i, av, exact=True)
        assert _zero(lhs - cc.tilde_u((), i, av, exact=True))


def test_rebased_cocycle_differs_by_coboundary(ctx1):
    D, rep = ctx1.deformation, ctx1.rep
    for l in (1, -2):
        R = cc.rebased(D, l)
        v = -D.u(fg.Word([l]))
        for w in list(fg.enumerate_words(2, 3))[:20]:
            assert np.allclose(R.u(w) - D.u(w), v - rep.matrix(w) @ v, atol=1e-9)


def test_scaling_is_linear(ctx1):
    D2 = cc.deformation_from_arcs(ctx1.av.scaled(3))
    for w in list(fg.enumerate_words(2, 3))[:10]:
        assert _zero(D2.u(w, exact=True) - 3 * ctx1.deformation.u(w, exact=True))


def test_affine_map_algebra(ctx1):
    A = ctx1.deformation.affine(fg.Word("a"))
    B = ctx1.deformation.affine(fg.Word("b"))
    AB = ctx1.deformation.affine(fg.Word("ab"))
    p = np.array([0.1, 0.2, -0.3])
    assert np.allclose(A.compose(B)(p), AB(p))
    assert np.allclose(A.inverse()(A(p)), p)


def test_json_round_trip(ctx1):
    data = cc.deformation_to_json(ctx1.deformation)
    back = cc.deformation_from_json(data, ctx1.rep)
    for w in list(fg.enumerate_words(2, 2)):
        assert _zero(back.u(w, exact=True) - ctx1.deformation.u(w, exact=True))


def test_csv_header(ctx1):
    text = cc.cocycle_csv(ctx1.deformation, [fg.Word("a"), fg.Word("ab")])
    lines = text.strip().splitlines()
    assert lines[0].startswith("word")
    assert len(lines) == 3
