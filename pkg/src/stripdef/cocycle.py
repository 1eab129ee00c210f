"""Arc vectors, the strip-deformation cocycle u and affine actions.

u(gamma) sums, over the walls crossed by the tile walk from K to gamma K,
the signed differences v^+ - v^- of the arc vectors at the wall's two
endpoints. Everything is computed in weight coordinates (floats); when the
representation carries an exact monomial model the same quantities are also
available exactly in monomial coordinates.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import freegroup as fg
from . import numcore as nc
from .posrep import BoundaryMap, Representation, veronese_flag_exact

_UNIT_DENOMINATOR = 10**15


@dataclass(frozen=True, eq=False)
class ArcVectors:
    """Vectors v^+, v^- at the endpoints of every base wall a(l).

    ``plus``/``minus`` map letters to weight-coordinate vectors; the
    ``exact_*`` maps hold the same vectors in monomial coordinates.
    """

    rep: Representation
    arcs: fg.ArcSystem
    plus: Mapping[int, np.ndarray]
    minus: Mapping[int, np.ndarray]
    exact_plus: Mapping[int, np.ndarray] | None = None
    exact_minus: Mapping[int, np.ndarray] | None = None

    @property
    def exact(self) -> bool:
        return self.exact_plus is not None

    def vectors(self, letter: int, prefix=(), exact: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """(v^+, v^-) for the wall prefix . a(letter)."""
        if exact:
            vp, vm = self.exact_plus[letter], self.exact_minus[letter]
            model = self.rep.monomial
            for l in reversed(fg.Word(prefix)):
                vp, vm = model.generator(l) @ vp, model.generator(l) @ vm
            return vp, vm
        vp, vm = self.plus[letter], self.minus[letter]
        if prefix:
            R = self.rep.matrix(prefix)
            vp, vm = R @ vp, R @ vm
        return vp, vm

    def strip(self, letter: int, exact: bool = False) -> np.ndarray:
        """w(l) = v^+ - v^- of the base wall a(l)."""
        vp, vm = self.vectors(letter, exact=exact)
        return vp - vm

    def scaled(self, factor) -> "ArcVectors":
        f = nc.frac(factor) if self.exact else float(factor)
        mul = lambda d: {k: v * f for k, v in d.items()}
        return ArcVectors(self.rep, self.arcs, mul(self.plus), mul(self.minus),
                          mul(self.exact_plus) if self.exact else None,
                          mul(self.exact_minus) if self.exact else None)

    def swapped(self, i: int) -> "ArcVectors":
        """Swap v^+ and v^- on both walls of generator i (a corrupted orientation)."""
        def swap(p, m):
            p, m = dict(p), dict(m)
            for l in (i, -i):
                p[l], m[l] = m[l], p[l]
            return p, m

        p, m = swap(self.plus, self.minus)
        ep, em = swap(self.exact_plus, self.exact_minus) if self.exact else (None, None)
        return ArcVectors(self.rep, self.arcs, p, m, ep, em)


def _scale_table(scales, N: int) -> dict:
    """Per-generator (plus, minus) positive scales; default all 1."""
    table = {}
    for i in range(1, N + 1):
        if scales is None:
            s = (1, 1)
        else:
            s = scales[i - 1]
            s = (s, s) if np.isscalar(s) or isinstance(s, (str, Fraction)) else tuple(s)
        s = tuple(nc.frac(x) if not isinstance(x, float) else nc.frac(repr(x)) for x in s)
        if any(x <= 0 for x in s):
            raise ValueError("arc scales must be positive")
        table[i] = s
    return table


def default_arc_vectors(bmap: BoundaryMap, scales=None) -> ArcVectors:
    """Unit positively oriented vectors on the walls a(g_i), extended equivariantly.

    Only the walls a_{i,+} get unit vectors; the vectors on a_{i,-} are their
    images under rho(g_i)^-1. With an exact monomial model the unit length
    is rounded to a rational so that the cocycle stays exact.
    """
    rep, A = bmap.rep, bmap.arcs
    table = _scale_table(scales, A.N)
    model = rep.monomial
    plus, minus, eplus, eminus = {}, {}, {}, {}
    for i in range(1, A.N + 1):
        arc = A.wall(i)
        for end, store, estore, k in (("plus", plus, eplus, 0), ("minus", minus, eminus, 1)):
            point = getattr(arc, end)
            exact_ok = model is not None and isinstance(point[0], Fraction)
            if exact_ok:
                vm = veronese_flag_exact(point, rep.n).line()
                norm = float(np.linalg.norm(model.to_weight(vm)))
                unit = Fraction(round(_UNIT_DENOMINATOR / norm), _UNIT_DENOMINATOR)
                vm = vm * (unit * table[i][k])
                estore[i] = vm
                store[i] = model.to_weight(vm)
            else:
                model = None
                store[i] = bmap.arc_flag(i, end).line() * float(table[i][k])
    for i in range(1, A.N + 1):
        ginv = rep.generator(-i)
        plus[-i], minus[-i] = ginv @ plus[i], ginv @ minus[i]
        if model is not None:
            minv = model.generator(-i)
            eplus[-i], eminus[-i] = minv @ eplus[i], minv @ eminus[i]
    if model is None:
        return ArcVectors(rep, A, plus, minus)
    return ArcVectors(rep, A, plus, minus, eplus, eminus)


# ----------------------------------------------------------------------------
# affine maps


@dataclass(frozen=True, eq=False)
class AffineMap:
    linear: np.ndarray
    translation: np.ndarray

    def __call__(self, p) -> np.ndarray:
        return self.linear @ np.asarray(p) + self.translation

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self o other: (A, a) o (B, b) = (A B, A b + a)."""
        return AffineMap(self.linear @ other.linear, self.linear @ other.translation + self.translation)

    def inverse(self) -> "AffineMap":
        Ainv = nc.inverse(self.linear)
        return AffineMap(Ainv, -(Ainv @ self.translation))

    @staticmethod
    def identity(d: int, exact: bool = False) -> "AffineMap":
        return AffineMap(nc.identity(d, exact=exact), nc.zeros(d, exact=exact))


# ----------------------------------------------------------------------------
# deformations


@dataclass(frozen=True, eq=False)
class AffineDeformation:
    """A cocycle given by its values on the generators.

    ``u_gen`` maps i to u(g_i) in weight coordinates; ``exact_gen`` holds the
    same values exactly in monomial coordinates, when available.
    """

    rep: Representation
    u_gen: Mapping[int, np.ndarray]
    exact_gen: Mapping[int, np.ndarray] | None = None
    arc_vectors: ArcVectors | None = field(default=None, repr=False)

    @property
    def exact(self) -> bool:
        return self.exact_gen is not None

    @property
    def d(self) -> int:
        return 4 * self.rep.n - 1

    def generator_value(self, l: int, exact: bool = False) -> np.ndarray:
        if exact:
            u, model = self.exact_gen[abs(l)], self.rep.monomial
            return u if l > 0 else -(model.generator(l) @ u)
        u = self.u_gen[abs(l)]
        return u if l > 0 else -(self.rep.generator(l) @ u)

    def u(self, w, exact: bool = False) -> np.ndarray:
        """u(w) by the recursion u(l w') = u(l) + rho(l) u(w')."""
        w = fg.Word(w)
        if exact:
            model = self.rep.monomial
            out = nc.zeros(self.d, exact=True)
            for l in reversed(w):
                out = self.generator_value(l, exact=True) + model.generator(l) @ out
            return out
        out = np.zeros(self.d)
        for l in reversed(w):
            out = self.generator_value(l) + self.rep.generator(l) @ out
        return out

    def affine(self, w) -> AffineMap:
        return AffineMap(self.rep.matrix(w), self.u(w))

    def scaled(self, factor: float) -> "AffineDeformation":
        eg = {k: v * nc.frac(factor) for k, v in self.exact_gen.items()} if self.exact else None
        return AffineDeformation(self.rep, {k: v * float(factor) for k, v in self.u_gen.items()}, eg)


def deformation_from_arcs(av: ArcVectors) -> AffineDeformation:
    """Strip cocycle: u(g_i) is the single crossing of a(g_i) = a_{i,+}, sign +1."""
    N = av.arcs.N
    u_gen = {i: av.strip(i) for i in range(1, N + 1)}
    exact_gen = {i: av.strip(i, exact=True) for i in range(1, N + 1)} if av.exact else None
    return AffineDeformation(av.rep, u_gen, exact_gen, av)


def coboundary(rep: Representation, v, exact_v=None) -> AffineDeformation:
    """u(gamma) = v - rho(gamma) v."""
    v = np.asarray(v, dtype=float)
    u_gen = {i: v - rep.generator(i) @ v for i in range(1, rep.N + 1)}
    exact_gen = None
    if exact_v is not None and rep.monomial is not None:
        ev = nc.exact_array(exact_v)
        exact_gen = {i: ev - rep.monomial.generator(i) @ ev for i in range(1, rep.N + 1)}
    return AffineDeformation(rep, u_gen, exact_gen)


def cocycle_eval(w, av: ArcVectors, exact: bool = False) -> np.ndarray:
    """u(w) as the signed sum over the crossings of the tile walk."""
    d = 4 * av.rep.n - 1
    total = nc.zeros(d, exact=exact)
    for x in fg.crossing_sequence(fg.Word(w)):
        vp, vm = av.vectors(x.letter, x.prefix, exact=exact)
        total = total + x.sign * (vp - vm)
    return total


def cocycle_identity_residual(w1, w2, deformation: AffineDeformation, exact: bool = False):
    """u(w1 w2) - rho(w1) u(w2) - u(w1); zero for a cocycle."""
    w1, w2 = fg.Word(w1), fg.Word(w2)
    R = deformation.rep.monomial.matrix(w1) if exact else deformation.rep.matrix(w1)
    u = deformation.u
    return u(w1 * w2, exact) - R @ u(w2, exact) - u(w1, exact)


def affine_action(w, deformation: AffineDeformation) -> AffineMap:
    return deformation.affine(w)


def tilde_u(prefix, letter: int, av: ArcVectors, deformation: AffineDeformation | None = None,
            exact: bool = False) -> np.ndarray:
    """Displacement of the wall prefix . a(letter): the crossings up to the
    tile prefix K, plus half of the final crossing."""
    prefix = fg.Word(prefix)
    if prefix and prefix[-1] == -letter:
        raise ValueError("wall descriptor is not reduced: the wall is behind the tile")
    deformation = deformation or deformation_from_arcs(av)
    sign = 1 if letter > 0 else -1
    half = Fraction(1, 2) if exact else 0.5
    vp, vm = av.vectors(letter, prefix, exact=exact)
    return deformation.u(prefix, exact) + half * sign * (vp - vm)


def rebased(deformation: AffineDeformation, l: int) -> AffineDeformation:
    """Cocycle built with base tile l K instead of K: u'(g) = rho(l) u(l^-1 g l)."""
    rep = deformation.rep
    u_gen = {}
    for i in range(1, rep.N + 1):
        conj = fg.Word([-l, i, l])
        u_gen[i] = rep.generator(l) @ deformation.u(conj)
    return AffineDeformation(rep, u_gen)


# ----------------------------------------------------------------------------
# serialization


def deformation_to_json(deformation: AffineDeformation, scales=None) -> dict:
    out = {
        "n": deformation.rep.n,
        "u_generators": [nc.array_to_json(deformation.u_gen[i]) for i in sorted(deformation.u_gen)],
    }
    if deformation.exact:
        out["u_generators_monomial"] = [nc.array_to_json(deformation.exact_gen[i]) for i in sorted(deformation.exact_gen)]
    av = deformation.arc_vectors
    if av is not None:
        out["arc_vectors"] = [
            {"letter": fg.letter_name(l), "plus": nc.array_to_json(av.plus[l]), "minus": nc.array_to_json(av.minus[l])}
            for l in av.arcs.letters()
        ]
    if scales is not None:
        out["scales"] = [[nc.scalar_to_json(nc.frac(x) if not isinstance(x, float) else x) for x in np.atleast_1d(s)]
                         for s in scales]
    return out


def deformation_from_json(data: dict, rep: Representation) -> AffineDeformation:
    if int(data["n"]) != rep.n:
        raise ValueError("deformation and representation disagree on n")
    u_gen = {i + 1: nc.float_array(nc.array_from_json(u)) for i, u in enumerate(data["u_generators"])}
    exact_gen = None
    if "u_generators_monomial" in data and rep.monomial is not None:
        exact_gen = {i + 1: nc.exact_array(nc.array_from_json(u)) for i, u in enumerate(data["u_generators_monomial"])}
    return AffineDeformation(rep, u_gen, exact_gen)


def cocycle_csv(deformation: AffineDeformation, words) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = deformation.d
    writer.writerow(["word", "length"] + [f"u{k + 1}" for k in range(d)])
    for w in words:
        u = deformation.u(w)
        writer.writerow([str(w), len(w)] + [f"{x:.17g}" for x in u])
    return buf.getvalue()
