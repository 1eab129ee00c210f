"""Sign variation, crooked halfspaces, stem quadrants and the crooked domain.

A crooked halfspace H_E is read off from the coordinates of a vector in a
J-basis E: the open one asks for upper sign variation at most 2n - 1 (with
a positive last sign in case of equality), the closed one the same for the
lower sign variation. The domain bounded by translated crooked hyperplanes
C(a) is searched by ``tile_locate``.
"""

from __future__ import annotations

import functools
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import freegroup as fg
from . import numcore as nc
from .cocycle import AffineDeformation, AffineMap, ArcVectors, tilde_u
from .flags import (
    JBasisPair,
    JForm,
    OrientedFlag,
    adapted_J_basis,
    is_positive_tuple,
    lower_unipotent_tp,
    opposite_basis,
)
from .posrep import BoundaryMap


class ZeroVectorError(ValueError):
    pass


# ----------------------------------------------------------------------------
# sign variation


@dataclass(frozen=True)
class SignVariation:
    upper: int
    lower: int
    last_upper: int
    last_nonzero: int


def _signs(coords) -> list[int]:
    out = []
    for c in coords:
        if isinstance(c, (float, np.floating)):
            out.append(int(np.sign(c)))
        else:
            out.append((c > 0) - (c < 0))
    return out


def upper_variation(signs: Sequence[int]) -> tuple[int, int]:
    """Maximal number of sign changes over sign choices for the zeros,
    with the last sign used by a maximizing choice."""
    best = {1: None, -1: None}
    for s in signs:
        allowed = (1, -1) if s == 0 else (s,)
        nxt = {1: None, -1: None}
        for t in allowed:
            cands = [best[t]] + [None if best[-t] is None else best[-t] + 1]
            cands = [c for c in cands if c is not None]
            nxt[t] = max(cands) if cands else 0
        best = nxt
    score = {t: v for t, v in best.items() if v is not None}
    top = max(score.values())
    lasts = [t for t, v in score.items() if v == top]
    if len(lasts) != 1:
        raise ZeroVectorError("zero vector")
    return top, lasts[0]


def lower_variation(signs: Sequence[int]) -> tuple[int, int]:
    """Sign changes of the nonzero subsequence and its last sign."""
    nz = [s for s in signs if s != 0]
    if not nz:
        raise ZeroVectorError("zero vector")
    return sum(a != b for a, b in zip(nz, nz[1:])), nz[-1]


def sign_variation(coords) -> SignVariation:
    """Upper and lower sign variation of a coordinate vector (already in basis E)."""
    s = _signs(coords)
    up, last_up = upper_variation(s)
    lo, last_nz = lower_variation(s)
    return SignVariation(up, lo, last_up, last_nz)


def _open_rule(signs, n: int) -> bool:
    if not any(signs):
        return False
    up, last = upper_variation(signs)
    return up < 2 * n - 1 or (up == 2 * n - 1 and last > 0)


def _closed_rule(signs, n: int) -> bool:
    if not any(signs):
        return True
    lo, last = lower_variation(signs)
    return lo < 2 * n - 1 or (lo == 2 * n - 1 and last > 0)


def _decide(coords, n: int, rule, where=None) -> bool:
    """Apply a sign rule, resolving float coordinates near zero.

    Coordinates within eps_sign of zero are tried as +, - and 0; if the
    answer is the same for all choices it is returned, otherwise the
    membership is ambiguous.
    """
    if nc.is_exact(coords):
        return rule(_signs(coords), n)
    c = np.asarray(coords, dtype=float)
    scale = max(1.0, float(np.max(np.abs(c))))
    tiny = np.abs(c) <= nc.tolerance().eps_sign * scale
    base = [int(np.sign(x)) for x in c]
    idx = np.flatnonzero(tiny)
    if idx.size == 0:
        return rule(base, n)
    if idx.size > 6:
        raise nc.AmbiguousSignError(f"{idx.size} coordinates are within tolerance of zero", where)
    answers = set()
    for choice in itertools.product((1, -1, 0), repeat=idx.size):
        s = list(base)
        for k, v in zip(idx, choice):
            s[k] = v
        answers.add(rule(s, n))
        if len(answers) > 1:
            raise nc.AmbiguousSignError("membership depends on coordinates within tolerance of zero", where)
    return answers.pop()


# ----------------------------------------------------------------------------
# halfspaces


@dataclass(frozen=True, eq=False)
class CrookedHalfspace:
    """The crooked halfspace H_E translated by ``translation``."""

    pair: JBasisPair
    translation: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        d = self.pair.J.d
        if self.translation is None:
            object.__setattr__(self, "translation", nc.zeros(d, exact=nc.is_exact(self.pair.E)))
        if nc.is_exact(self.pair.E):
            inv = nc.inverse(self.pair.E)
        else:
            inv = np.linalg.inv(nc.float_array(self.pair.E))
        object.__setattr__(self, "_Einv", inv)

    @property
    def n(self) -> int:
        return self.pair.J.n

    @property
    def E(self) -> np.ndarray:
        return self.pair.E

    def coords(self, v) -> np.ndarray:
        """Coordinates of v - translation in the basis E."""
        v = np.asarray(v)
        if not (nc.is_exact(v) and nc.is_exact(self.E)):
            v = nc.float_array(v)
            return self._Einv.astype(float) @ (v - nc.float_array(self.translation))
        return self._Einv @ (v - self.translation)

    def contains_open(self, v) -> bool:
        return _decide(self.coords(v), self.n, _open_rule, "open")

    def contains_closed(self, v) -> bool:
        return _decide(self.coords(v), self.n, _closed_rule, "closed")

    def on_hyperplane(self, v) -> bool:
        return self.contains_closed(v) and not self.contains_open(v)

    def opposite(self) -> "CrookedHalfspace":
        """H_Ehat with the same translation: the complement of the closure."""
        return CrookedHalfspace(JBasisPair(opposite_basis(self.E), self.pair.J), self.translation)

    def translated(self, t) -> "CrookedHalfspace":
        return CrookedHalfspace(self.pair, self.translation + np.asarray(t))

    def image(self, A: AffineMap) -> "CrookedHalfspace":
        """A(H) = H_{L E} + (L t + a) for A = (L, a) with L in SO(2n, 2n-1)."""
        return CrookedHalfspace(JBasisPair(A.linear @ self.E, self.pair.J), A(self.translation))

    @property
    def flags(self) -> tuple[OrientedFlag, OrientedFlag]:
        return self.pair.F, self.pair.F_hat


def in_open_halfspace(v, H: CrookedHalfspace) -> bool:
    return H.contains_open(v)


def in_closed_halfspace(v, H: CrookedHalfspace) -> bool:
    return H.contains_closed(v)


def standard_halfspace(n: int, exact: bool = True) -> CrookedHalfspace:
    J = JForm(n)
    return CrookedHalfspace(JBasisPair(nc.identity(J.d, exact=exact), J))


def halfspace_from_flags(F: OrientedFlag, G: OrientedFlag, translation=None, J: JForm | None = None) -> CrookedHalfspace:
    """H(F, G) + translation, from the J-basis adapted to (F, G)."""
    J = J or JForm((F.d + 1) // 4)
    pair = adapted_J_basis(F, G, J)
    t = None if translation is None else np.asarray(translation)
    if t is not None and not nc.is_exact(pair.E):
        t = nc.float_array(t)
    return CrookedHalfspace(pair, t)


# ----------------------------------------------------------------------------
# stem quadrants


def in_stem_quadrant(u, H: CrookedHalfspace, tol: float | None = None) -> bool:
    """Coordinates in E supported on {1, d} with u_1 <= 0 <= u_d."""
    c = H.pair.coordinates(np.asarray(u))
    if nc.is_exact(c):
        return all(x == 0 for x in c[1:-1]) and c[0] <= 0 <= c[-1]
    c = np.asarray(c, dtype=float)
    tol = nc.tolerance().eps_eq * max(1.0, float(np.max(np.abs(c)))) if tol is None else tol
    return bool(np.all(np.abs(c[1:-1]) <= tol) and c[0] <= tol and c[-1] >= -tol)


def stem_vector(H: CrookedHalfspace, alpha, beta) -> np.ndarray:
    """-alpha e_1 + beta e_d."""
    return -alpha * H.E[:, 0] + beta * H.E[:, -1]


def stem_witness(u, H: CrookedHalfspace, big: float | None = None):
    """A vector a in closed H_E with a + u outside, or None if u is in SQ(E).

    The witness has 2n large alternating entries placed so that a
    disallowed coordinate of u adds one more sign change to a vector
    already at the maximal lower variation (or at 2n - 2 with a repeated
    sign around the offending index).
    """
    n = H.n
    d = H.pair.J.d
    c = np.asarray(H.pair.coordinates(np.asarray(u)), dtype=float)
    if in_stem_quadrant(u, H):
        return None
    big = big if big is not None else 1e3 * (1.0 + float(np.max(np.abs(c))))
    tol = nc.tolerance().eps_eq * max(1.0, float(np.max(np.abs(c))))
    a = np.zeros(d)
    bad = [k for k in range(1, d - 1) if abs(c[k]) > tol]
    if bad:
        i = bad[0]
        p = min(i, 2 * n - 1)
        q = 2 * n - p
        s = -1 if c[i] > 0 else 1
        # before i: alternating, ending with s; after i: alternating, starting with s
        for j, k in enumerate(range(i - p, i)):
            a[k] = s * (-1) ** (p - 1 - j)
        for j, k in enumerate(range(i + 1, i + 1 + q)):
            a[k] = s * (-1) ** j
    elif c[0] > tol:
        for j, k in enumerate(range(1, 2 * n + 1)):
            a[k] = -((-1) ** j)
    elif c[-1] < -tol:
        for j, k in enumerate(range(d - 1 - 2 * n, d - 1)):
            a[k] = -((-1) ** j)
    else:
        return None
    a = nc.float_array(H.E) @ (big * a)
    return a


# ----------------------------------------------------------------------------
# sampling through half-subspaces


def sample_halfspace(H: CrookedHalfspace, count: int, seed=None, spread: float = 1.0,
                     isotropic: bool = False) -> np.ndarray:
    """Points of the open halfspace from positive half-subspaces X^(2n)_+.

    X runs over flags E U in ((F_E, F_Ehat)) with U lower unipotent totally
    positive (from the lower semigroup of SO(2n, 2n-1) when ``isotropic``);
    the point is X_{1..2n-1} c + lam x_{2n} with lam > 0, then translated.
    """
    from .posrep import lower_semigroup_element

    rng = nc.rng(seed)
    E = nc.float_array(H.E)
    n, d = H.n, H.pair.J.d
    m = 2 * n
    out = np.empty((count, d))
    for k in range(count):
        if isotropic:
            U = nc.float_array(lower_semigroup_element(n, rng.uniform(0.2, 2.0, size=(2 * n - 1) ** 2)))
        else:
            U = lower_unipotent_tp(d, rng)
        X = E @ U
        c = rng.normal(size=m - 1) * spread
        lam = rng.exponential() * spread + 1e-3
        out[k] = X[:, : m - 1] @ c + lam * X[:, m - 1]
    return out + nc.float_array(H.translation)


# ----------------------------------------------------------------------------
# disjointness


@dataclass
class DisjointnessReport:
    passed: bool
    checked: int
    violations: list = field(default_factory=list)
    ambiguous: int = 0
    algebraic: bool | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "ambiguous": self.ambiguous,
            "algebraic": self.algebraic,
            "violations": [np.asarray(v, dtype=float).tolist() for v in self.violations[:10]],
        }


def _sample_check(src: CrookedHalfspace, test, samples: int, seed) -> tuple[int, list, int]:
    pts = sample_halfspace(src, samples, seed)
    bad, amb = [], 0
    for p in pts:
        try:
            if not test(p):
                bad.append(p)
        except nc.AmbiguousSignError:
            amb += 1
    return samples, bad, amb


def quadruple_disjointness(F, G, G2, F2, samples: int = 1000, seed=None,
                           translations: Sequence | None = None) -> DisjointnessReport:
    """Sampled check that closed H(F, G) and closed H(G', F') meet only at the
    vertex, and that H(G, G') lies inside H(F, F')."""
    if not is_positive_tuple([F, G, G2, F2]):
        raise ValueError("flags do not form a positive quadruple")
    t1, t2 = (None, None) if translations is None else translations
    H1 = halfspace_from_flags(F, G, t1)
    H2 = halfspace_from_flags(G2, F2, t2)
    inner = halfspace_from_flags(G, G2)
    outer = halfspace_from_flags(F, F2)
    ss = nc.seed_sequence(seed)
    s1, s2 = ss.spawn(2)
    n1, bad1, amb1 = _sample_check(H1, lambda p: not H2.contains_closed(p), samples, s1)
    n2, bad2, amb2 = _sample_check(inner, outer.contains_open, samples, s2)
    bad = bad1 + bad2
    return DisjointnessReport(not bad and not (amb1 + amb2), n1 + n2, bad, amb1 + amb2)


# ----------------------------------------------------------------------------
# the domain


@dataclass(frozen=True, eq=False)
class Wall:
    letter: int
    halfspace: CrookedHalfspace
    pairing: AffineMap

    @property
    def name(self) -> str:
        return fg.letter_name(self.letter)


@dataclass(frozen=True, eq=False)
class CrookedDomain:
    """Complement of the 2N open halfspaces H(a) beyond the walls of K."""

    walls: tuple
    deformation: AffineDeformation

    @property
    def n(self) -> int:
        return self.deformation.rep.n

    def wall(self, letter: int) -> Wall:
        for w in self.walls:
            if w.letter == letter:
                return w
        raise KeyError(letter)

    def claims(self, p) -> list[int]:
        """Letters whose open halfspace contains p."""
        return [w.letter for w in self.walls if w.halfspace.contains_open(p)]

    def contains(self, p) -> bool:
        return not self.claims(p)

    @functools.cached_property
    def rational_pairings(self) -> dict:
        """Pairing maps with float entries read as dyadic rationals, and their
        exact inverses. Replaying words in these keeps deep relocation free of
        roundoff, which matters for n >= 2 where rho(w) is badly conditioned."""
        out = {}
        for w in self.walls:
            L = _dyadic(w.pairing.linear)
            t = _dyadic(w.pairing.translation)
            out[w.letter] = (L, t, nc.inverse(L))
        return out

    def act(self, word, q, exact: bool = False) -> np.ndarray:
        """A_w q; with ``exact`` computed in the rational replay of the maps."""
        if not exact:
            return self.deformation.affine(fg.Word(word))(q)
        p = _dyadic(q)
        for l in reversed(fg.Word(word)):
            L, t, _ = self.rational_pairings[l]
            p = L @ p + t
        return p


def _dyadic(a) -> np.ndarray:
    a = np.asarray(a)
    if nc.is_exact(a):
        return a
    return np.vectorize(lambda x: Fraction(float(x)), otypes=[object])(a)


def wall_halfspace(prefix, letter: int, av: ArcVectors, bmap: BoundaryMap,
                   deformation: AffineDeformation | None = None) -> CrookedHalfspace:
    """H(a) for the wall a = prefix . a(letter), on the side away from K."""
    arc = bmap.arcs.wall(letter)
    ends = ("minus", "plus") if arc.away_from_base else ("plus", "minus")
    F = bmap.arc_flag(letter, ends[0], prefix)
    G = bmap.arc_flag(letter, ends[1], prefix)
    return halfspace_from_flags(F, G, tilde_u(prefix, letter, av, deformation), bmap.rep.J)


def build_domain(deformation: AffineDeformation, av: ArcVectors, bmap: BoundaryMap,
                 A: fg.ArcSystem | None = None) -> CrookedDomain:
    walls = []
    for l in bmap.arcs.letters():
        H = wall_halfspace((), l, av, bmap, deformation)
        walls.append(Wall(l, H, deformation.affine(fg.Word([l]))))
    return CrookedDomain(tuple(walls), deformation)


@dataclass
class SidePairingReport:
    passed: bool
    translation_residual: float
    flag_match: bool
    samples: int
    mismatches: int


def verify_side_pairing(domain: CrookedDomain, samples: int = 200, seed=None) -> list[SidePairingReport]:
    """A_{g_i} maps H(a_{i,-}) onto the complement of closed H(a_{i,+})."""
    out = []
    ss = nc.seed_sequence(seed)
    N = len(domain.walls) // 2
    for i, child in zip(range(1, N + 1), ss.spawn(N)):
        Hm, Hp = domain.wall(-i).halfspace, domain.wall(i).halfspace
        Ag = domain.wall(i).pairing
        img = Hm.image(Ag)
        res = float(np.max(np.abs(nc.float_array(img.translation) - nc.float_array(Hp.translation))))
        flag_ok = img.pair.F == Hp.pair.F_hat and img.pair.F_hat == Hp.pair.F
        rng = nc.rng(child)
        mism = 0
        scale = 1.0 + float(np.max(np.abs(nc.float_array(Hp.translation))))
        pts = rng.normal(size=(samples, Hp.pair.J.d)) * scale
        opp = Hp.opposite()
        for p in pts:
            try:
                if Hm.contains_open(p) != opp.contains_open(Ag(p)):
                    mism += 1
            except nc.AmbiguousSignError:
                pass
        ok = res <= 1e-8 * scale and flag_ok and mism == 0
        out.append(SidePairingReport(ok, res, flag_ok, samples, mism))
    return out


def algebraic_nesting_check(domain: CrookedDomain, av: ArcVectors, bmap: BoundaryMap) -> bool:
    """Sufficient condition behind wall disjointness: the far intervals of the
    base walls are pairwise nested apart and each displacement lies in the
    stem quadrant of its own halfspace."""
    for w in domain.walls:
        H = w.halfspace
        if not in_stem_quadrant(H.translation, CrookedHalfspace(H.pair)):
            return False
    from .posrep import verify_flag_ping_pong

    return verify_flag_ping_pong(bmap.rep, bmap, bmap.arcs).passed


def wall_disjointness(domain: CrookedDomain, samples: int = 1000, seed=None) -> dict:
    """Sampled check that the closed halfspaces of distinct walls do not meet."""
    letters = [w.letter for w in domain.walls]
    pairs = list(itertools.combinations(letters, 2))
    ss = nc.seed_sequence(seed)
    out = {}
    for (a, b), child in zip(pairs, ss.spawn(len(pairs))):
        Ha, Hb = domain.wall(a).halfspace, domain.wall(b).halfspace
        c1, c2 = child.spawn(2)
        _, bad1, amb1 = _sample_check(Ha, lambda p: not Hb.contains_closed(p), samples, c1)
        _, bad2, amb2 = _sample_check(Hb, lambda p: not Ha.contains_closed(p), samples, c2)
        bad = bad1 + bad2
        out[(fg.letter_name(a), fg.letter_name(b))] = DisjointnessReport(
            not bad and not (amb1 + amb2), 2 * samples, bad, amb1 + amb2)
    return out


# ----------------------------------------------------------------------------
# tiling


class TileLocateError(RuntimeError):
    def __init__(self, message, point=None, word=None):
        super().__init__(message)
        self.point = point
        self.word = word


@dataclass(frozen=True)
class TileLocation:
    word: fg.Word
    depth: int
    point: np.ndarray = field(repr=False)


def _locate(p, domain: CrookedDomain, max_depth: int) -> TileLocation:
    exact = nc.is_exact(np.asarray(p))
    p = np.asarray(p) if exact else np.asarray(p, dtype=float)
    word: list[int] = []
    for depth in range(max_depth + 1):
        claims = domain.claims(nc.float_array(p) if exact else p)
        if not claims:
            return TileLocation(fg.Word(word), len(word), p)
        if len(claims) > 1:
            raise nc.AmbiguousSignError(f"walls {claims} all claim the point", p)
        if depth == max_depth:
            break
        l = claims[0]
        if exact:
            L, t, Linv = domain.rational_pairings[l]
            p = Linv @ (p - t)
        else:
            p = domain.wall(l).pairing.inverse()(p)
        word.append(l)
    raise TileLocateError(f"maximal depth {max_depth} exceeded", p, fg.Word(word))


def tile_locate(p, domain: CrookedDomain, max_depth: int = 64) -> TileLocation:
    """Word w with p in A_w(D), found by walking back across the walls.

    A rational p is walked back exactly through ``rational_pairings``.
    An ambiguous membership is retried once with eps_sign / 10.
    """
    try:
        return _locate(p, domain, max_depth)
    except nc.AmbiguousSignError:
        ctx = nc.tolerance()
        with nc.use_tolerance(eps_sign=ctx.eps_sign / 10):
            return _locate(p, domain, max_depth)


@dataclass
class TilingReport:
    samples: int
    located: int
    depth_histogram: dict
    failures: list
    ambiguous: int
    uniqueness_checked: int = 0
    uniqueness_failures: int = 0

    @property
    def success_fraction(self) -> float:
        return self.located / self.samples if self.samples else 1.0

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "located": self.located,
            "success_fraction": self.success_fraction,
            "ambiguous": self.ambiguous,
            "depth_histogram": {str(k): v for k, v in sorted(self.depth_histogram.items())},
            "uniqueness_checked": self.uniqueness_checked,
            "uniqueness_failures": self.uniqueness_failures,
            "failures": [list(map(float, f)) for f in self.failures[:20]],
        }


def uniform_ball(count: int, d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(count, d))
    x /= np.linalg.norm(x, axis=1)[:, None]
    r = radius * rng.uniform(size=count) ** (1.0 / d)
    return x * r[:, None]


def tiling_experiment(domain: CrookedDomain, samples: int, radius: float, max_depth: int = 64,
                      seed=None, uniqueness: int = 20) -> TilingReport:
    """Locate uniform points of a ball; spot-check that relocated interior
    points return to the same tile."""
    ss = nc.seed_sequence(seed)
    s_pts, s_uni = ss.spawn(2)
    d = 4 * domain.n - 1
    pts = uniform_ball(samples, d, radius, nc.rng(s_pts))
    hist: Counter = Counter()
    failures, amb = [], 0
    interior = []
    for p in pts:
        try:
            loc = tile_locate(p, domain, max_depth)
        except nc.AmbiguousSignError:
            amb += 1
            failures.append(p)
            continue
        except TileLocateError:
            failures.append(p)
            continue
        hist[loc.depth] += 1
        if len(interior) < uniqueness:
            interior.append((loc.point, loc.word))
    checked = bad = 0
    rng = nc.rng(s_uni)
    letters = [w.letter for w in domain.walls]
    for q, _ in interior:
        w = fg.Word(rng.choice(letters, size=3))
        checked += 1
        try:
            loc = tile_locate(domain.act(w, q, exact=True), domain, max_depth)
            if loc.word != w:
                bad += 1
        except (nc.AmbiguousSignError, TileLocateError):
            bad += 1
    return TilingReport(samples, samples - len(failures), dict(hist), failures, amb, checked, bad)


# ----------------------------------------------------------------------------
# meshes (n = 1)


def mesh_emit(H: CrookedHalfspace, bounds: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Triangle mesh of the crooked plane C_E (n = 1) inside a box.

    In E-coordinates the plane is the stem {x2 = 0, x1 x3 >= 0} with the
    wings {x1 = 0, x2 <= 0} and {x3 = 0, x2 >= 0}, each bounded by a null
    axis of the stem. Coordinates run over [-bounds, bounds] and are mapped
    by E and the translation.
    """
    if H.n != 1:
        raise ValueError(f"mesh output needs n = 1 (dimension 3), got n = {H.n}")
    b = float(bounds)
    quads = [
        [(0, 0, 0), (b, 0, 0), (b, 0, b), (0, 0, b)],
        [(0, 0, 0), (0, 0, -b), (-b, 0, -b), (-b, 0, 0)],
        [(0, 0, -b), (0, 0, b), (0, -b, b), (0, -b, -b)],
        [(-b, 0, 0), (b, 0, 0), (b, b, 0), (-b, b, 0)],
    ]
    verts: list[tuple] = []
    index = {}
    faces = []
    for q in quads:
        ids = []
        for v in q:
            if v not in index:
                index[v] = len(verts)
                verts.append(v)
            ids.append(index[v])
        faces.append((ids[0], ids[1], ids[2]))
        faces.append((ids[0], ids[2], ids[3]))
    V = np.array(verts, dtype=float) @ nc.float_array(H.E).T + nc.float_array(H.translation)
    return V, np.array(faces, dtype=int)


def mesh_to_obj(V: np.ndarray, faces: np.ndarray) -> str:
    lines = ["# crooked plane"]
    lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in V]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def domain_to_json(domain: CrookedDomain) -> dict:
    return {
        "n": domain.n,
        "walls": [
            {
                "letter": w.name,
                "basis": nc.array_to_json(nc.float_array(w.halfspace.E)),
                "translation": nc.array_to_json(nc.float_array(w.halfspace.translation)),
            }
            for w in domain.walls
        ],
    }
