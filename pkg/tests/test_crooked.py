import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stripdef import crooked as ck
from stripdef import flags as fl
from stripdef import freegroup as fg
from stripdef import numcore as nc
from stripdef import posrep as pr


def _frac(v):
    return nc.exact_array(v)


@pytest.mark.parametrize(
    "coords, upper, lower",
    [((1, 0, 3), 2, 0), ((-1, 1, 2), 1, 1), ((1, 1, 1), 0, 0), ((1, -1, 1, -1, 1, -1, 1), 6, 6)],
)
def test_sign_variation_values(coords, upper, lower):
    sv = ck.sign_variation(_frac(coords))
    assert (sv.upper, sv.lower) == (upper, lower)


def test_upper_variation_last_sign():
    # zeros after the last nonzero sign can still flip it
    assert ck.upper_variation([1, 0]) == (1, -1)
    assert ck.upper_variation([1, 0, 0])[0] == 2


def test_zero_vector():
    with pytest.raises(ck.ZeroVectorError):
        ck.sign_variation(_frac([0, 0, 0]))
    H = ck.standard_halfspace(1)
    zero = _frac([0, 0, 0])
    assert not H.contains_open(zero)
    assert H.contains_closed(zero)


def _brute_upper(signs):
    zeros = [k for k, s in enumerate(signs) if s == 0]
    best = 0
    for ch in itertools.product((1, -1), repeat=len(zeros)):
        t = list(signs)
        for k, c in zip(zeros, ch):
            t[k] = c
        best = max(best, sum(a != b for a, b in zip(t, t[1:])))
    return best


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=9))
def test_upper_variation_matches_brute_force(signs):
    if not any(signs):
        return
    assert ck.upper_variation(signs)[0] == _brute_upper(signs)


@given(st.lists(st.integers(-2, 2), min_size=7, max_size=7))
def test_open_inside_closed(v):
    H = ck.standard_halfspace(2)
    x = _frac(v)
    if any(v) and H.contains_open(x):
        assert H.contains_closed(x)


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_closure_complement_is_opposite_open(v):
    H = ck.standard_halfspace(1)
    x = _frac(v)
    if any(v):
        assert H.contains_closed(x) != H.opposite().contains_open(x)


def test_near_zero_float_coordinate_resolves():
    H = ck.standard_halfspace(1, exact=False)
    v = np.array([1.0, 1e-15, -3.0])
    assert not H.contains_open(v)
    assert not H.contains_closed(v)


def test_float_ambiguity_is_reported():
    H = ck.standard_halfspace(1, exact=False)
    with pytest.raises(nc.AmbiguousSignError):
        H.contains_open(np.array([1.0, 1e-15, 3.0]))


def test_crooked_plane_pieces_n1():
    H = ck.standard_halfspace(1)
    on = [(1, 0, 3), (-2, 0, -1), (0, -1, 5), (0, -1, -5), (4, 1, 0), (-4, 1, 0)]
    off = [(-1, 0, 1), (0, 1, 1), (1, -1, 0), (1, -1, -1)]
    for v in on:
        assert H.on_hyperplane(_frac(v)), v
    for v in off:
        assert not H.on_hyperplane(_frac(v)), v


def test_halfspace_equivariance(ctx1):
    H = ck.standard_halfspace(1, exact=False)
    A = ctx1.deformation.affine(fg.Word("aB"))
    img = H.image(A)
    rng = np.random.default_rng(0)
    for p in rng.normal(size=(200, 3)) * 3:
        try:
            assert H.contains_open(p) == img.contains_open(A(p))
        except nc.AmbiguousSignError:
            pass


def test_translation_moves_membership():
    H = ck.standard_halfspace(1)
    t = _frac([1, 2, 3])
    assert H.translated(t).contains_closed(t)
    assert not H.translated(t).contains_open(t)


@pytest.mark.parametrize("n", [1, 2])
def test_stem_quadrant_membership(n):
    H = ck.standard_halfspace(n, exact=False)
    assert ck.in_stem_quadrant(ck.stem_vector(H, 1.0, 2.0), H)
    assert not ck.in_stem_quadrant(ck.stem_vector(H, -1.0, 2.0), H)
    e = np.zeros(4 * n - 1)
    e[1] = 1.0
    assert not ck.in_stem_quadrant(e, H)


@pytest.mark.parametrize("n", [1, 2])
def test_stem_translation_keeps_inclusion(n):
    H = ck.standard_halfspace(n, exact=False)
    u = ck.stem_vector(H, 0.7, 1.3)
    for p in ck.sample_halfspace(H, 300, seed=1):
        try:
            assert H.contains_closed(p + u)
        except nc.AmbiguousSignError:
            pass


@pytest.mark.parametrize("n", [1, 2])
def test_stem_witness(n):
    # the witness sits on coordinate hyperplanes, so membership is decided exactly
    H = ck.standard_halfspace(n)
    rng = np.random.default_rng(n)
    d = 4 * n - 1
    assert ck.stem_witness(ck.stem_vector(H, 1, 1), H) is None
    for _ in range(20):
        u = _frac(rng.integers(-5, 6, size=d))
        a = ck.stem_witness(u, H)
        if ck.in_stem_quadrant(u, H):
            assert a is None
            continue
        a = _frac([Fraction(x) for x in a])
        assert H.contains_closed(a)
        assert not H.contains_closed(a + u)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("isotropic", [False, True])
def test_samples_lie_in_open_halfspace(n, isotropic):
    H = ck.standard_halfspace(n, exact=False)
    pts = ck.sample_halfspace(H, 300, seed=2, isotropic=isotropic)
    assert all(H.contains_open(p) for p in pts)


@pytest.mark.parametrize("n", [1, 2])
def test_quadruple_disjointness_veronese(n):
    F, G, G2, F2 = (pr.veronese_flag(float(k), n) for k in (-1.5, -0.5, 0.5, 1.5))
    rep = ck.quadruple_disjointness(F, G, G2, F2, samples=500, seed=0)
    assert rep.passed, rep.to_json()


def test_quadruple_disjointness_needs_positive_order():
    F, G, G2, F2 = (pr.veronese_flag(float(k), 1) for k in (0, 2, 1, 3))
    with pytest.raises(ValueError):
        ck.quadruple_disjointness(F, G, G2, F2, samples=10)


def test_halfspace_from_flags_recovers_flags():
    F, G = pr.veronese_flag(0.0, 2), pr.veronese_flag(1.5, 2)
    H = ck.halfspace_from_flags(F, G)
    assert H.flags == (F, G)
    assert fl.JForm(2).residual(H.E) < 1e-9


def test_side_pairing(ctx):
    dom = ck.build_domain(ctx.deformation, ctx.av, ctx.bmap)
    for r in ck.verify_side_pairing(dom, samples=100, seed=0):
        assert r.passed, r


def test_algebraic_nesting(ctx):
    dom = ck.build_domain(ctx.deformation, ctx.av, ctx.bmap)
    assert ck.algebraic_nesting_check(dom, ctx.av, ctx.bmap)


def test_wall_disjointness_small(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    reports = ck.wall_disjointness(dom, samples=200, seed=0)
    assert len(reports) == 6
    assert all(r.passed for r in reports.values())


def test_origin_is_in_base_tile_n1(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    loc = ck.tile_locate(np.zeros(3), dom)
    assert loc.depth == 0 and loc.word == fg.Word()


def test_relocation_returns_word(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    q = np.zeros(3)
    for w in ("a", "aB", "bba", "AbAB"):
        loc = ck.tile_locate(dom.act(w, q, exact=True), dom)
        assert loc.word == fg.Word(w)


def test_max_depth_error(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    p = dom.act("abab", np.zeros(3), exact=True)
    with pytest.raises(ck.TileLocateError):
        ck.tile_locate(p, dom, max_depth=2)


def test_small_tiling_experiment(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    rep = ck.tiling_experiment(dom, 300, 10.0, seed=0)
    assert rep.success_fraction == 1.0
    assert rep.uniqueness_failures == 0
    assert rep.to_json()["located"] == 300


def test_mesh_lies_on_crooked_plane():
    H = ck.standard_halfspace(1)
    V, faces = ck.mesh_emit(H, bounds=2.0)
    assert faces.shape == (8, 3)
    rng = np.random.default_rng(0)
    for f in faces:
        for _ in range(5):
            w = rng.dirichlet(np.ones(3))
            p = [Fraction(x).limit_denominator(10**6) for x in w @ V[f]]
            assert H.contains_closed(_frac(p)) and not H.contains_open(_frac(p))
    assert any(np.allclose(v, [2, 0, 2]) for v in V)
    text = ck.mesh_to_obj(V, faces)
    assert text.count("\nv ") == len(V) and text.count("\nf ") == 8


def test_mesh_rejects_higher_rank():
    with pytest.raises(ValueError):
        ck.mesh_emit(ck.standard_halfspace(2))


def test_domain_json(ctx1):
    dom = ck.build_domain(ctx1.deformation, ctx1.av, ctx1.bmap)
    js = ck.domain_to_json(dom)
    assert js["n"] == 1 and len(js["walls"]) == 4
