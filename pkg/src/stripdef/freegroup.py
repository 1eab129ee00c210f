"""Reduced words, Schottky groups in SL(2,R) and the dual arc system.

Letters are nonzero integers: ``i`` stands for the generator g_i and ``-i``
for its inverse (1-based). Words print as lowercase/uppercase strings,
``"aB"`` meaning g_1 g_2^-1.

Points of the circle at infinity are homogeneous pairs ``(x, y)`` standing
for ``x/y`` in R u {oo}; they are normalized so that ``y >= 0``, and
``(1, 0)`` is infinity. Counter-clockwise order is increasing ``x/y``
followed by infinity.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import numcore as nc


class WordError(ValueError):
    pass


class NotHyperbolicError(ValueError):
    pass


# ----------------------------------------------------------------------------
# words


def letter_name(l: int) -> str:
    c = chr(ord("a") + abs(l) - 1)
    return c if l > 0 else c.upper()


def parse_letter(c) -> int:
    if isinstance(c, (int, np.integer)):
        if c == 0:
            raise WordError("0 is not a letter")
        return int(c)
    if isinstance(c, str) and len(c) == 1 and c.isalpha():
        k = ord(c.lower()) - ord("a") + 1
        return k if c.islower() else -k
    raise WordError(f"unknown letter {c!r}")


class Word(tuple):
    """A freely reduced word; construction reduces its input."""

    def __new__(cls, letters=()):
        if isinstance(letters, str):
            letters = list(letters)
        stack: list[int] = []
        for c in letters:
            l = parse_letter(c)
            if stack and stack[-1] == -l:
                stack.pop()
            else:
                stack.append(l)
        return super().__new__(cls, stack)

    def __str__(self) -> str:
        return "".join(letter_name(l) for l in self) or "1"

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __mul__(self, other) -> "Word":
        return Word(tuple(self) + tuple(Word(other)))

    def inverse(self) -> "Word":
        return Word(-l for l in reversed(self))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        return Word(tuple(self) * k)

    def rank_used(self) -> int:
        return max((abs(l) for l in self), default=0)


def reduce(letters) -> Word:
    return Word(letters)


def enumerate_words(N: int, L: int) -> Iterator[Word]:
    """All reduced words of length 1..L, shortest first, each exactly once."""
    if L < 1:
        raise ValueError("L must be at least 1")
    letters = [l for i in range(1, N + 1) for l in (i, -i)]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for l in letters:
                if not w or w[-1] != -l:
                    nxt.append(w + (l,))
        for w in nxt:
            yield Word(w)
        frontier = nxt


def word_count(N: int, length: int) -> int:
    return 2 * N * (2 * N - 1) ** (length - 1)


def cyclic_reduce(w: Word) -> Word:
    w = list(w)
    while len(w) > 1 and w[0] == -w[-1]:
        w = w[1:-1]
    return Word(w)


def _letter_key(l: int) -> tuple[int, int]:
    return (abs(l), l < 0)


def conjugacy_representative(w: Word) -> Word:
    """Lexicographically least rotation of the cyclic reduction."""
    c = tuple(cyclic_reduce(w))
    if not c:
        return Word()
    rotations = [c[k:] + c[:k] for k in range(len(c))]
    return Word(min(rotations, key=lambda r: [_letter_key(l) for l in r]))


def conjugacy_representatives(N: int, L: int) -> list[Word]:
    seen: dict[Word, None] = {}
    for w in enumerate_words(N, L):
        seen.setdefault(conjugacy_representative(w), None)
    return list(seen)


# ----------------------------------------------------------------------------
# the circle at infinity


Point = tuple


def point(value) -> Point:
    """Normalize a circle point from a number, ``"p/q"``, ``"inf"`` or a pair."""
    if isinstance(value, (tuple, list)) and len(value) == 2:
        x, y = value
    elif isinstance(value, str) and value.strip().lower() in ("inf", "oo", "infinity"):
        x, y = 1, 0
    elif isinstance(value, float) and math.isinf(value):
        x, y = 1, 0
    else:
        v = nc.frac(value) if not isinstance(value, float) else value
        x, y = v, 1
    if isinstance(x, (int, str)):
        x = nc.frac(x)
    if isinstance(y, (int, str)):
        y = nc.frac(y)
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    if y == 0:
        return (Fraction(1) if isinstance(x, Fraction) else 1.0, y)
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return (x / y, Fraction(1))
    return (float(x) / float(y), 1.0)


def point_value(p: Point) -> float:
    x, y = p
    return math.inf if y == 0 else float(x) / float(y)


def point_to_json(p: Point):
    x, y = p
    if y == 0:
        return "inf"
    return nc.scalar_to_json(x / y if isinstance(x, Fraction) else float(x) / float(y))


def angle(p: Point) -> float:
    """Position on the circle in [0, 2 pi), increasing counter-clockwise from 0."""
    x, y = p
    return (2.0 * math.atan2(float(x), float(y))) % (2.0 * math.pi)


def point_from_angle(theta: float) -> Point:
    return point((math.sin(theta / 2.0), math.cos(theta / 2.0)))


def ccw_between(p: Point, a: Point, b: Point, closed: bool = False) -> bool:
    """Whether p lies on the counter-clockwise arc from a to b."""
    tp, ta, tb = angle(p), angle(a), angle(b)
    eps = 1e-12
    span = (tb - ta) % (2 * math.pi)
    off = (tp - ta) % (2 * math.pi)
    if closed:
        return off <= span + eps or off >= 2 * math.pi - eps
    return eps < off < span - eps


def is_ccw(points: Sequence[Point]) -> bool:
    """Whether distinct points appear in counter-clockwise cyclic order."""
    ang = [angle(p) for p in points]
    k = int(np.argmin(ang))
    rot = ang[k:] + ang[:k]
    return all(a < b for a, b in zip(rot, rot[1:]))


def same_point(p: Point, q: Point, tol: float = 1e-9) -> bool:
    if isinstance(p[0], Fraction) and isinstance(q[0], Fraction):
        return p == q
    d = abs(angle(p) - angle(q))
    return min(d, 2 * math.pi - d) <= tol


def mobius(g, p: Point) -> Point:
    """Action of g = [[a, b], [c, d]] on p: x/y -> (a x + b y)/(c x + d y)."""
    g = np.asarray(g)
    x, y = p
    return point((g[0, 0] * x + g[0, 1] * y, g[1, 0] * x + g[1, 1] * y))


def sl2_inverse(g) -> np.ndarray:
    g = np.asarray(g)
    out = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]], dtype=g.dtype)
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    return out / det


def trace(g):
    g = np.asarray(g)
    return g[0, 0] + g[1, 1]


def _check_hyperbolic(g):
    if abs(float(trace(g))) <= 2.0 + 1e-12:
        raise NotHyperbolicError(f"|trace| = {abs(float(trace(g))):.6g} is not > 2")


def fixed_point_vectors(g) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors (attracting, repelling) of a hyperbolic g in SL(2, R).

    Each eigenvector is taken as (lam - d, c) or (b, lam - a), whichever
    avoids cancellation; a - d is formed exactly on rational input.
    """
    _check_hyperbolic(g)
    g = np.asarray(g)
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    tr = a + d
    amd = float(a - d)
    s = math.sqrt(float(tr * tr - 4))
    sg = 1.0 if float(tr) > 0 else -1.0
    b, c = float(b), float(c)
    out = []
    for root in (sg * s, -sg * s):
        # lam - d = (amd + root) / 2 and lam - a = (-amd + root) / 2
        if amd * root >= 0:
            v = np.array([(amd + root) / 2.0, c])
            if not np.any(v):
                v = np.array([b, (root - amd) / 2.0])
        else:
            v = np.array([b, (root - amd) / 2.0])
            if not np.any(v):
                v = np.array([(amd + root) / 2.0, c])
        out.append(v)
    return out[0], out[1]


def mobius_fixed_points(g) -> tuple[Point, Point]:
    """(attracting, repelling) fixed points of a hyperbolic element."""
    att, rep = fixed_point_vectors(g)
    return point((att[0], att[1])), point((rep[0], rep[1]))


def translation_length(g) -> float:
    """Hyperbolic translation length 2 arccosh(|tr g| / 2)."""
    _check_hyperbolic(g)
    return 2.0 * math.acosh(abs(float(trace(g))) / 2.0)


# ----------------------------------------------------------------------------
# Schottky data and arcs


@dataclass(frozen=True)
class Interval:
    """Closed arc of the circle from ``start`` counter-clockwise to ``end``."""

    start: Point
    end: Point

    def contains(self, p: Point, closed: bool = True) -> bool:
        return ccw_between(p, self.start, self.end, closed=closed)

    def image(self, g) -> "Interval":
        return Interval(mobius(g, self.start), mobius(g, self.end))

    def midpoint(self) -> Point:
        a, b = angle(self.start), angle(self.end)
        return point_from_angle(a + ((b - a) % (2 * math.pi)) / 2.0)

    def complement(self) -> "Interval":
        return Interval(self.end, self.start)


@dataclass
class SchottkyData:
    """Generators g_i with ping-pong intervals I_i^- (repelling) and I_i^+ (attracting)."""

    gens: list[np.ndarray]
    minus: list[Interval]
    plus: list[Interval]

    @property
    def N(self) -> int:
        return len(self.gens)

    def generator(self, l: int) -> np.ndarray:
        g = self.gens[abs(l) - 1]
        return g if l > 0 else sl2_inverse(g)

    def matrix(self, w: Word) -> np.ndarray:
        exact = all(nc.is_exact(g) for g in self.gens)
        M = nc.identity(2, exact=exact)
        for l in w:
            M = M @ self.generator(l)
        return M

    def far_interval(self, l: int) -> Interval:
        """Interval at infinity beyond the wall a(l) crossed by the letter l."""
        return self.plus[l - 1] if l > 0 else self.minus[-l - 1]

    def cyclic_intervals(self) -> list[tuple[str, Interval]]:
        items = [(f"I{i + 1}-", I) for i, I in enumerate(self.minus)]
        items += [(f"I{i + 1}+", I) for i, I in enumerate(self.plus)]
        return sorted(items, key=lambda kv: angle(kv[1].start))


@dataclass
class PingPongReport:
    passed: bool
    violations: list[str] = field(default_factory=list)
    paired_walls: bool = True


def verify_ping_pong(S: SchottkyData) -> PingPongReport:
    """Check disjointness, hyperbolicity and g_i(complement of I_i^-) inside I_i^+."""
    violations: list[str] = []
    paired = True
    intervals = S.cyclic_intervals()
    for (na, A), (nb, B) in itertools.combinations(intervals, 2):
        if any(B.contains(p) for p in (A.start, A.end)) or any(A.contains(p) for p in (B.start, B.end)):
            violations.append(f"intervals {na} and {nb} overlap")
    for i, g in enumerate(S.gens):
        name = letter_name(i + 1)
        try:
            _check_hyperbolic(g)
        except NotHyperbolicError as exc:
            violations.append(f"generator {name}: {exc}")
            continue
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        if abs(float(det) - 1.0) > 1e-12:
            violations.append(f"generator {name} has determinant {float(det)}")
        Im, Ip = S.minus[i], S.plus[i]
        comp = Im.complement()
        images = [mobius(g, comp.start), mobius(g, comp.end), mobius(g, comp.midpoint())]
        if not all(Ip.contains(p, closed=True) for p in images[:2]):
            violations.append(f"generator {name} maps an endpoint of I{i + 1}- outside I{i + 1}+")
        if not Ip.contains(images[2], closed=False):
            violations.append(f"generator {name} maps the complement of I{i + 1}- outside I{i + 1}+")
        if not (same_point(images[0], Ip.start) and same_point(images[1], Ip.end)):
            paired = False
        att, rep = mobius_fixed_points(g)
        if not Ip.contains(att, closed=False) or not Im.contains(rep, closed=False):
            violations.append(f"generator {name} fixed points are not inside its intervals")
    return PingPongReport(passed=not violations, violations=violations, paired_walls=paired)


@dataclass(frozen=True)
class Arc:
    """A transversely oriented geodesic arc with left endpoint ``plus``."""

    plus: Point
    minus: Point
    away_from_base: bool


@dataclass
class ArcSystem:
    """Arcs dual to the generators: walls a(g_i) = a_{i,+} and a(g_i^-1) = a_{i,-}.

    Every wall a_{i,+} is oriented away from the base tile K and
    a_{i,-} = g_i^-1 a_{i,+} carries the equivariant orientation, which
    points back into K. Crossing a wall with its orientation counts +1.
    """

    schottky: SchottkyData
    walls: dict[int, Arc]

    @property
    def N(self) -> int:
        return self.schottky.N

    def wall(self, l: int) -> Arc:
        return self.walls[l]

    def letters(self) -> list[int]:
        return [l for i in range(1, self.N + 1) for l in (i, -i)]


def dual_arc_system(S: SchottkyData) -> ArcSystem:
    report = verify_ping_pong(S)
    if not report.passed:
        raise ValueError("Schottky data fails ping-pong: " + "; ".join(report.violations))
    if not report.paired_walls:
        raise ValueError("generators do not pair the boundary geodesics of the intervals")
    walls = {}
    for i in range(1, S.N + 1):
        Ip, Im = S.plus[i - 1], S.minus[i - 1]
        # Facing I+ from K, its counter-clockwise end is on the left.
        walls[i] = Arc(plus=Ip.end, minus=Ip.start, away_from_base=True)
        walls[-i] = Arc(plus=Im.start, minus=Im.end, away_from_base=False)
    return ArcSystem(S, walls)


@dataclass(frozen=True)
class Crossing:
    """The wall prefix * a(letter) crossed with sign ``sign``."""

    prefix: Word
    letter: int
    sign: int

    def __str__(self) -> str:
        side = "+" if self.letter > 0 else "-"
        return f"({self.prefix}).a{abs(self.letter)}{side}:{self.sign:+d}"


def crossing_sequence(w: Word, A: ArcSystem | None = None) -> list[Crossing]:
    """Walls crossed by the tile walk K, l1 K, l1 l2 K, ... with signs."""
    w = Word(w)
    return [Crossing(Word(w[:j]), l, 1 if l > 0 else -1) for j, l in enumerate(w)]


# ----------------------------------------------------------------------------
# bundled example and serialization


def example_rank2() -> SchottkyData:
    """Two hyperbolics with crossed axes (-1, 1) and (0, oo)."""
    F = Fraction
    g1 = nc.exact_array([[F(5, 3), F(4, 3)], [F(4, 3), F(5, 3)]])
    g2 = nc.exact_array([[3, 0], [0, F(1, 3)]])
    minus = [Interval(point(-2), point(F(-1, 2))), Interval(point(F(-1, 3)), point(F(1, 3)))]
    plus = [Interval(point(F(1, 2)), point(2)), Interval(point(3), point(-3))]
    return SchottkyData([g1, g2], minus, plus)


def example_rank1(lam=Fraction(2)) -> SchottkyData:
    """Cyclic group generated by diag(lam, 1/lam), lam > 1."""
    lam = nc.frac(lam)
    g = nc.exact_array([[lam, 0], [0, 1 / lam]])
    r = Fraction(1, 2)
    minus = [Interval(point(-r), point(r))]
    plus = [Interval(point(lam * lam * r), point(-lam * lam * r))]
    return SchottkyData([g], minus, plus)


def bundled_example() -> SchottkyData:
    """The rank-2 example shipped as package data."""
    from importlib import resources

    text = resources.files("stripdef").joinpath("data/rank2.json").read_text()
    return schottky_from_json(json.loads(text))


def schottky_to_json(S: SchottkyData) -> dict:
    return {
        "generators": [nc.array_to_json(g) for g in S.gens],
        "intervals": [
            {
                "minus": [point_to_json(I.start), point_to_json(I.end)],
                "plus": [point_to_json(J.start), point_to_json(J.end)],
            }
            for I, J in zip(S.minus, S.plus)
        ],
    }


def schottky_from_json(data: dict, validate: bool = True) -> SchottkyData:
    gens = [nc.array_from_json(g) for g in data["generators"]]
    if len(gens) != len(data["intervals"]):
        raise ValueError("one interval pair per generator is required")
    for g in gens:
        if g.shape != (2, 2):
            raise ValueError("generators must be 2x2 matrices")
    minus = [Interval(point(d["minus"][0]), point(d["minus"][1])) for d in data["intervals"]]
    plus = [Interval(point(d["plus"][0]), point(d["plus"][1])) for d in data["intervals"]]
    S = SchottkyData(gens, minus, plus)
    if validate:
        report = verify_ping_pong(S)
        if not report.passed:
            raise ValueError("invalid Schottky data: " + "; ".join(report.violations))
    return S
