import numpy as np
import pytest

from stripdef import cli
from stripdef import cocycle as cc
from stripdef import freegroup as fg
from stripdef import margulis as mg


def test_neutral_vector_is_fixed_and_unit(ctx):
    rep, J = ctx.rep, ctx.rep.J
    for w in ("a", "ab", "aBB", "abAb"):
        cert = mg.neutral_of_element(w, rep, ctx.bmap)
        x0 = cert.neutral
        assert J.dot(x0, x0) == pytest.approx(1.0, abs=1e-9)
        assert cert.route_residual < 1e-7
        # exact direction is fixed by the monomial image
        y = cert.exact_direction
        assert all(v == 0 for v in rep.monomial.matrix(w) @ y - y)


def test_translation_length_matches_sl2(ctx1):
    for w in ("a", "ab", "aBB"):
        g = ctx1.rep.sl2_matrix(w)
        assert mg.translation_length(w, ctx1.rep) == pytest.approx(fg.translation_length(g))


def test_identity_is_not_regular(ctx1):
    with pytest.raises(mg.NotRegularError):
        mg.neutral_of_element(fg.Word(), ctx1.rep)


def test_alpha_is_conjugation_invariant(ctx):
    for w, h in (("a", "b"), ("ab", "B"), ("aab", "ba")):
        assert abs(mg.conjugacy_invariance_check(w, h, ctx.deformation, ctx.bmap)) < 1e-9


def test_alpha_is_homogeneous_in_powers(ctx1):
    a1 = mg.margulis_invariant("ab", ctx1.deformation, ctx1.bmap)
    a3 = mg.margulis_invariant(fg.Word("ab") ** 3, ctx1.deformation, ctx1.bmap)
    assert a3 == pytest.approx(3 * a1, rel=1e-9)


def test_alpha_of_inverse(ctx1):
    for w in ("a", "aB", "abb"):
        a = mg.margulis_invariant(w, ctx1.deformation, ctx1.bmap)
        b = mg.margulis_invariant(fg.Word(w).inverse(), ctx1.deformation, ctx1.bmap)
        assert a == pytest.approx(b, rel=1e-9)


def test_coboundary_alpha_vanishes_exactly(ctx):
    D = cli.control_coboundary(ctx.rep)
    report = mg.properness_scan(D, 3, ctx.bmap)
    assert all(r.sign == 0 for r in report.records)
    assert max(abs(r.alpha) for r in report.records) == 0


def test_float_coboundary_alpha_is_small(ctx1):
    D = cc.coboundary(ctx1.rep, np.array([0.4, -0.2, 1.1]))
    assert max(abs(mg.margulis_invariant(w, D, ctx1.bmap)) for w in fg.enumerate_words(2, 3)) < 1e-9


def test_strip_cocycle_is_proper_short_scan(ctx):
    report = mg.properness_scan(ctx.deformation, 4, ctx.bmap)
    assert report.passed
    assert report.witness is None
    assert report.min_ratio > 0


def test_corrupted_cocycle_gives_witness(ctx):
    D = cc.deformation_from_arcs(ctx.av.swapped(1))
    report = mg.properness_scan(D, 3, ctx.bmap)
    assert not report.passed
    bad, good = report.witness
    assert bad.sign <= 0 and good.sign > 0


def test_report_serialization(ctx1):
    report = mg.properness_scan(ctx1.deformation, 2, ctx1.bmap)
    lines = report.to_csv().strip().splitlines()
    assert lines[0] == "word,length,t,alpha,ratio"
    assert len(lines) == len(report.records) + 1
    js = report.to_json()
    assert js["status"] == "PASS" and js["words"] == len(report.records)


def test_scan_rejects_bad_length(ctx1):
    with pytest.raises(ValueError):
        mg.properness_scan(ctx1.deformation, 0, ctx1.bmap)


def test_neutral_monotonicity_on_axis_configuration(ctx1):
    """x0(g) . f <= x0(h) . f for f on a flag between the fixed points of g,
    whenever the cyclic-order hypothesis holds."""
    results = []
    words = list(fg.enumerate_words(2, 2))
    for g in words:
        att, rep = fg.mobius_fixed_points(ctx1.rep.sl2_matrix(g))
        for mid in (fg.Interval(att, rep).midpoint(), fg.Interval(rep, att).midpoint()):
            F = ctx1.bmap(mid)
            results += [mg.neutral_monotonicity_check(g, h, F, ctx1.bmap) for h in words if h != g]
    assert False not in results
    assert results.count(True) >= 4
