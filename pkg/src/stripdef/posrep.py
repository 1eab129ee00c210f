"""Positive representations into SO(2n, 2n-1).

Covers the Chevalley generators and Lusztig's positive semigroup, the
symmetric-power (Fuchsian) representation sigma of SL(2, R), the Veronese
boundary map and its equivariant extension to translated arc endpoints.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import numcore as nc
from . import freegroup as fg
from .flags import (
    JForm,
    OrientedFlag,
    closure_nested,
    is_isotropic_flag,
    is_positive_triple,
    is_positive_tuple,
    same_flag,
)


class CertificationError(ValueError):
    pass


# ----------------------------------------------------------------------------
# group elements


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A matrix certified to lie in SO(2n, 2n-1)."""

    M: np.ndarray = field(repr=False)
    form_residual: float
    det_residual: float

    @property
    def exact(self) -> bool:
        return nc.is_exact(self.M)

    @property
    def n(self) -> int:
        return (self.M.shape[0] + 1) // 4


def certify(M, J: JForm | None = None) -> GroupElement:
    """Check M^T J M = J and det M = 1; exactly on rational input."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise CertificationError("group elements are square matrices")
    J = J or JForm((M.shape[0] + 1) // 4)
    if M.shape[0] != J.d:
        raise CertificationError(f"expected a {J.d}x{J.d} matrix")
    res = J.residual(M)
    dres = abs(float(nc.det(M)) - 1.0) if not nc.is_exact(M) else abs(nc.det(M) - 1)
    if nc.is_exact(M):
        if res != 0 or dres != 0:
            raise CertificationError("matrix does not preserve J exactly or has det != 1")
        return GroupElement(M, 0.0, 0.0)
    eps = nc.tolerance().eps_eq * max(1.0, nc.inf_norm(M)) ** 2
    if res > eps or dres > eps:
        raise CertificationError(f"form residual {res:.3g}, det residual {dres:.3g} exceed {eps:.3g}")
    return GroupElement(M, float(res), float(dres))


# ----------------------------------------------------------------------------
# root data and the positive semigroup


def chevalley_generator(i: int, n: int) -> np.ndarray:
    """X_i = E_{i,i+1} + E_{d-i,d+1-i} (1-based), an exact nilpotent in so(J)."""
    if not 1 <= i <= 2 * n - 1:
        raise ValueError(f"root index {i} outside 1..{2 * n - 1}")
    d = 4 * n - 1
    X = nc.zeros((d, d), exact=True)
    X[i - 1, i] += 1
    X[d - i - 1, d - i] += 1
    return X


def semigroup_word(n: int) -> list[int]:
    """Reduced word ((s1 s3 ... s_{2n-1})(s2 s4 ... s_{2n-2}))^{2n-1}."""
    odd = list(range(1, 2 * n, 2))
    even = list(range(2, 2 * n - 1, 2))
    return (odd + even) * (2 * n - 1)


@dataclass(frozen=True)
class RootData:
    n: int
    generators: tuple
    word: tuple


def root_data(n: int) -> RootData:
    return RootData(n, tuple(chevalley_generator(i, n) for i in range(1, 2 * n)), tuple(semigroup_word(n)))


def exp_nilpotent(X: np.ndarray, t) -> np.ndarray:
    """exp(t X) as a finite sum; exact for rational t and X."""
    exact = nc.is_exact(X) and not isinstance(t, float)
    if exact:
        t = nc.frac(t)
    d = X.shape[0]
    out = nc.identity(d, exact=exact)
    term = nc.identity(d, exact=exact)
    for k in range(1, d + 1):
        term = term @ X * (t / k)
        if not np.any(term != 0):
            break
        out = out + term
    return out


def _check_params(n: int, params: Sequence) -> list:
    count = (2 * n - 1) ** 2
    params = list(params)
    if len(params) != count:
        raise ValueError(f"expected {count} parameters, got {len(params)}")
    if any(not p > 0 for p in params):
        raise ValueError("semigroup parameters must be positive")
    return [p if isinstance(p, float) else nc.frac(p) for p in params]


@lru_cache(maxsize=None)
def _exp_terms(i: int, n: int, transpose: bool) -> tuple:
    """Off-diagonal entries of exp(t X_i) as polynomials in t: (r, c, ((k, coeff), ...))."""
    X = chevalley_generator(i, n)
    if transpose:
        X = X.T.copy()
    d = X.shape[0]
    powers = []
    term = nc.identity(d, exact=True)
    for k in range(1, d + 1):
        term = term @ X * Fraction(1, k)
        if not np.any(term != 0):
            break
        powers.append((k, term))
    out = []
    for r in range(d):
        for c in range(d):
            poly = tuple((k, P[r, c]) for k, P in powers if P[r, c] != 0)
            if poly:
                out.append((r, c, poly))
    return tuple(out)


def _semigroup_product(n: int, params: Sequence, transpose: bool) -> np.ndarray:
    params = _check_params(n, params)
    exact = not any(isinstance(p, float) for p in params)
    M = nc.identity(4 * n - 1, exact=exact)
    for i, t in zip(semigroup_word(n), params):
        # M exp(tX) by column operations, since exp(tX) is sparse and unipotent
        new = M.copy()
        for r, c, poly in _exp_terms(i, n, transpose):
            val = sum(coeff * t**k for k, coeff in poly)
            new[:, c] = new[:, c] + (val if exact else float(val)) * M[:, r]
        M = new
    return M


def positive_semigroup_element(n: int, params: Sequence) -> GroupElement:
    """Product of exp(t_k X_{i_k}) along the reduced word; upper unipotent."""
    return certify(_semigroup_product(n, params, transpose=False), JForm(n))


def lower_semigroup_element(n: int, params: Sequence) -> np.ndarray:
    """Transposed counterpart of positive_semigroup_element, lower unipotent."""
    M = _semigroup_product(n, params, transpose=True)
    certify(M, JForm(n))
    return M


def elementary(d: int, i: int, j: int, t, exact: bool = True) -> np.ndarray:
    """I + t E_{i,j} (1-based)."""
    M = nc.identity(d, exact=exact)
    M[i - 1, j - 1] = nc.frac(t) if exact else float(t)
    return M


def sl_factorization(n: int, params: Sequence) -> list[tuple[int, object]]:
    """Factorization of the semigroup element into SL(d) root exponentials.

    Returns (i, t) meaning exp(t E_{i,i+1}). Outer roots split into two
    commuting factors and the middle root into three, so the word length
    is d(d-1)/2, that of the longest permutation of SL(d).
    """
    params = _check_params(n, params)
    d = 4 * n - 1
    m = 2 * n - 1
    out: list[tuple[int, object]] = []
    for i, t in zip(semigroup_word(n), params):
        if i < m:
            out += [(i, t), (d - i, t)]
        else:
            out += [(m, t / 2), (m + 1, t), (m, t / 2)]
    return out


def sl_product(d: int, factors: Sequence[tuple[int, object]]) -> np.ndarray:
    exact = not any(isinstance(t, float) for _, t in factors)
    M = nc.identity(d, exact=exact)
    for i, t in factors:
        # right multiplication by I + t E_{i,i+1}
        M[:, i] = M[:, i] + (nc.frac(t) if exact else float(t)) * M[:, i - 1]
    return M


def is_reduced_sl_word(d: int, letters: Sequence[int]) -> bool:
    """Whether the simple transpositions compose with no length drop."""
    perm = list(range(d))
    inversions = 0
    for i in letters:
        a, b = perm[i - 1], perm[i]
        inversions += 1 if a < b else -1
        perm[i - 1], perm[i] = b, a
    return inversions == len(letters)


def middle_entry(M) -> object:
    n = (np.asarray(M).shape[0] + 1) // 4
    return np.asarray(M)[2 * n - 1, 2 * n - 1]


# ----------------------------------------------------------------------------
# the symmetric-power representation


def _form_matrix(g, m: int) -> np.ndarray:
    """Action of g on degree m forms in the monomial basis x^{m-k} y^k.

    Column k is the expansion of (a x + c y)^{m-k} (b x + d y)^k, so that
    g.f(x, y) = f((x, y) g) defines a homomorphism.
    """
    g = np.asarray(g)
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    exact = nc.is_exact(g)

    def poly_pow(p, k):
        out = [Fraction(1) if exact else 1.0]
        for _ in range(k):
            nxt = [0] * (len(out) + 1)
            for s, v in enumerate(out):
                nxt[s] += v * p[0]
                nxt[s + 1] += v * p[1]
            out = nxt
        return out

    M = nc.zeros((m + 1, m + 1), exact=exact)
    for k in range(m + 1):
        p = poly_pow((a, c), m - k)
        q = poly_pow((b, d), k)
        for s, u in enumerate(p):
            for r, v in enumerate(q):
                M[s + r, k] += u * v
    return M


def sym_monomial(g, n: int) -> np.ndarray:
    """sigma(g) in the unnormalized monomial basis; exact on rational g."""
    return _form_matrix(g, 4 * n - 2)


def sym_representation(g, n: int) -> GroupElement:
    """sigma(g) in the basis b_k = sqrt(C(m, k)) x^{m-k} y^k, m = 4n - 2."""
    g = np.asarray(g)
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if abs(float(det) - 1.0) > 1e-12:
        raise ValueError("sym_representation needs det g = 1")
    m = 4 * n - 2
    c = np.sqrt([math.comb(m, k) for k in range(m + 1)])
    M = nc.float_array(sym_monomial(g, n))
    M = M * c[None, :] / c[:, None]
    return certify(M, JForm(n))


def sign_involution(d: int, exact: bool = True) -> np.ndarray:
    """S = diag(1, -1, 1, ..., -1, 1)."""
    S = nc.identity(d, exact=exact)
    for k in range(1, d, 2):
        S[k, k] = -S[k, k]
    return S


@lru_cache(maxsize=None)
def _base_flag_sign(n: int) -> int:
    """Global orientation of the Veronese flag at infinity: +1 for I, -1 for -S.

    The flag at infinity is the standard flag, possibly twisted by -S (a
    J-isometry of determinant 1). The choice making a known
    counter-clockwise triple positive is kept.
    """
    d = 4 * n - 1
    pts = [fg.point(0), fg.point(1), fg.point("inf")]
    for sgn in (1, -1):
        base = nc.identity(d, exact=True) if sgn == 1 else -sign_involution(d)
        flags = [OrientedFlag(_monomial_frame(p, n) @ base) for p in pts]
        if is_positive_triple(*flags):
            return sgn
    raise CertificationError("no orientation of the Veronese curve is positive")


def base_flag_basis(n: int, exact: bool = True) -> np.ndarray:
    d = 4 * n - 1
    B = nc.identity(d, exact=True) if _base_flag_sign(n) == 1 else -sign_involution(d)
    return B if exact else nc.float_array(B)


def _monomial_frame(p, n: int) -> np.ndarray:
    """sym_monomial(h) for an exact h with h(oo) = p and positive determinant."""
    x, y = p
    if y == 0:
        return nc.identity(4 * n - 1, exact=True)
    h = nc.exact_array([[x, -1], [y, 0]])
    return sym_monomial(h, n)


def _rotation_to(p) -> np.ndarray:
    x, y = float(p[0]), float(p[1])
    r = math.hypot(x, y)
    return np.array([[x / r, -y / r], [y / r, x / r]])


def veronese_flag(t, n: int) -> OrientedFlag:
    """Osculating flag of the Veronese curve at a circle point (float).

    xi(t) = sigma(h) xi(oo) for any h in SL(2, R) with h(oo) = t; a
    rotation is used so that the basis stays orthonormal.
    """
    p = fg.point(t)
    R = _rotation_to(p)
    return OrientedFlag(sym_representation(R, n).M @ base_flag_basis(n, exact=False))


def veronese_flag_exact(t, n: int) -> OrientedFlag:
    """Same oriented flag expressed in monomial coordinates, exact for rational t.

    The coordinate change to the b_k basis is a positive diagonal, so
    determinant signs and flag positivity agree with veronese_flag.
    """
    p = fg.point(t)
    if not isinstance(p[0], Fraction):
        raise ValueError("exact Veronese flags need a rational point")
    return OrientedFlag(_monomial_frame(p, n) @ base_flag_basis(n, exact=True))


def monomial_to_weight(n: int) -> np.ndarray:
    """Diagonal map from monomial coordinates to b_k coordinates (divide by c_k)."""
    m = 4 * n - 2
    return np.diag(1.0 / np.sqrt([float(math.comb(m, k)) for k in range(m + 1)]))


# ----------------------------------------------------------------------------
# representations of free groups


@dataclass(frozen=True, eq=False)
class MonomialModel:
    """Exact copy of the Fuchsian representation in monomial coordinates.

    A vector with weight-basis coordinates v has monomial coordinates
    c * v with c_k = sqrt(C(m, k)); the form becomes the rational matrix
    D^-1 J D^-1 and generator images are rational whenever g is.
    """

    n: int
    gens: tuple
    inverses: tuple
    J: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    def generator(self, l: int) -> np.ndarray:
        return self.gens[l - 1] if l > 0 else self.inverses[-l - 1]

    def matrix(self, w) -> np.ndarray:
        M = nc.identity(4 * self.n - 1, exact=True)
        for l in fg.Word(w):
            M = M @ self.generator(l)
        return M

    def to_weight(self, v) -> np.ndarray:
        return nc.float_array(v) / self.c

    def from_weight(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) * self.c

    def dot(self, u, v):
        return np.asarray(u) @ self.J @ np.asarray(v)


def monomial_model(sl2_gens, n: int) -> MonomialModel:
    m = 4 * n - 2
    Jm = JForm(n).matrix(exact=True)
    for k in range(m + 1):
        Jm[k, m - k] = Jm[k, m - k] / math.comb(m, k)
    gens = tuple(sym_monomial(g, n) for g in sl2_gens)
    inverses = tuple(sym_monomial(fg.sl2_inverse(g), n) for g in sl2_gens)
    c = np.sqrt([float(math.comb(m, k)) for k in range(m + 1)])
    return MonomialModel(n, gens, inverses, Jm, c)


@dataclass(frozen=True, eq=False)
class Representation:
    n: int
    gens: tuple
    provenance: str = "user-supplied"
    sl2: tuple | None = None
    monomial: MonomialModel | None = None

    @property
    def N(self) -> int:
        return len(self.gens)

    @property
    def J(self) -> JForm:
        return JForm(self.n)

    def generator(self, l: int) -> np.ndarray:
        g = self.gens[abs(l) - 1].M
        return g if l > 0 else self._inverses[abs(l) - 1]

    @property
    def _inverses(self):
        inv = self.__dict__.get("_inv")
        if inv is None:
            Jm = self.J.matrix(exact=False)
            # g^-1 = J^-1 g^T J with J^-1 = J
            inv = tuple(Jm @ g.M.T @ Jm if not g.exact else
                        self.J.matrix(exact=True) @ g.M.T @ self.J.matrix(exact=True) for g in self.gens)
            object.__setattr__(self, "_inv", inv)
        return inv

    def matrix(self, w) -> np.ndarray:
        w = fg.Word(w)
        M = nc.identity(4 * self.n - 1, exact=all(g.exact for g in self.gens))
        for l in w:
            M = M @ self.generator(l)
        return M

    def sl2_matrix(self, w) -> np.ndarray:
        if self.sl2 is None:
            raise ValueError("representation has no underlying SL(2, R) data")
        w = fg.Word(w)
        exact = all(nc.is_exact(g) for g in self.sl2)
        M = nc.identity(2, exact=exact)
        for l in w:
            g = self.sl2[abs(l) - 1]
            M = M @ (g if l > 0 else fg.sl2_inverse(g))
        return M


def build_representation(S: fg.SchottkyData, n: int) -> Representation:
    report = fg.verify_ping_pong(S)
    if not report.passed:
        raise ValueError("Schottky data fails ping-pong: " + "; ".join(report.violations))
    gens = tuple(sym_representation(g, n) for g in S.gens)
    exact = all(nc.is_exact(g) for g in S.gens)
    model = monomial_model(S.gens, n) if exact else None
    return Representation(n, gens, "fuchsian-sym", tuple(S.gens), model)


def representation_from_matrices(mats, n: int | None = None) -> Representation:
    mats = [np.asarray(M) for M in mats]
    n = n or (mats[0].shape[0] + 1) // 4
    return Representation(n, tuple(certify(M, JForm(n)) for M in mats), "user-supplied")


# ----------------------------------------------------------------------------
# boundary maps


@dataclass(eq=False)
class BoundaryMap:
    """Equivariant boundary map on the points needed by the construction.

    Base flags live at the endpoints of the base arcs; flags at translated
    endpoints gamma.p are rho(gamma) xi(p). A Fuchsian map also evaluates
    at arbitrary circle points through the Veronese curve.
    """

    rep: Representation
    arcs: fg.ArcSystem
    base: dict = field(repr=False)
    evaluator: object = None
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: object = field(default_factory=threading.Lock, repr=False)

    @property
    def n(self) -> int:
        return self.rep.n

    def __call__(self, t) -> OrientedFlag:
        if self.evaluator is None:
            raise ValueError("boundary map has no evaluator away from arc endpoints")
        return self.evaluator(t)

    def arc_flag(self, letter: int, end: str, prefix=()) -> OrientedFlag:
        """xi at the ``end`` ('plus' or 'minus') endpoint of prefix . a(letter)."""
        if end not in ("plus", "minus"):
            raise ValueError("end must be 'plus' or 'minus'")
        prefix = fg.Word(prefix)
        key = (prefix, letter, end)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        F = self.base[(letter, end)]
        # letter by letter keeps float frames well conditioned
        for l in reversed(prefix):
            F = F.transform(self.rep.generator(l))
        with self._lock:
            return self._memo.setdefault(key, F)

    def base_flags(self) -> dict:
        return dict(self.base)


def build_boundary_map(rep: Representation, S: fg.SchottkyData, A: fg.ArcSystem) -> BoundaryMap:
    if rep.provenance != "fuchsian-sym":
        raise ValueError("automatic boundary maps exist only for the Fuchsian representation")
    n = rep.n
    base = {}
    for l in A.letters():
        arc = A.wall(l)
        base[(l, "plus")] = veronese_flag(arc.plus, n)
        base[(l, "minus")] = veronese_flag(arc.minus, n)
    return BoundaryMap(rep, A, base, evaluator=lambda t: veronese_flag(t, n))


def boundary_map_from_flags(rep: Representation, A: fg.ArcSystem, flags: dict) -> BoundaryMap:
    """User-supplied base flags keyed by (letter, 'plus' | 'minus')."""
    J = rep.J
    for key, F in flags.items():
        if not is_isotropic_flag(F, J):
            raise ValueError(f"boundary flag at {key} is not isotropic")
    return BoundaryMap(rep, A, dict(flags))


@dataclass
class FlagPingPongReport:
    passed: bool
    pairs_checked: list = field(default_factory=list)
    violations: list = field(default_factory=list)


def _exact_fuchsian(rep: Representation, A: fg.ArcSystem) -> bool:
    if rep.provenance != "fuchsian-sym" or rep.sl2 is None:
        return False
    if not all(nc.is_exact(g) for g in rep.sl2):
        return False
    return all(isinstance(getattr(A.wall(l), end)[0], Fraction)
               for l in A.letters() for end in ("plus", "minus"))


def verify_flag_ping_pong(rep: Representation, bmap: BoundaryMap, A: fg.ArcSystem) -> FlagPingPongReport:
    """Pairing of endpoint flags by the generators and nesting of flag intervals.

    For the Fuchsian representation with rational data the sign sweeps run
    exactly, on Veronese flags in monomial coordinates.
    """
    report = FlagPingPongReport(True)
    J = rep.J
    for l in A.letters():
        for end in ("plus", "minus"):
            if not is_isotropic_flag(bmap.arc_flag(l, end), J):
                report.violations.append(f"flag at {fg.letter_name(l)}{end} is not isotropic")
    if _exact_fuchsian(rep, A):
        def flag(l, end):
            return veronese_flag_exact(getattr(A.wall(l), end), rep.n)

        def act(i):
            return sym_monomial(rep.sl2[i - 1], rep.n)
    else:
        flag = bmap.arc_flag

        def act(i):
            return rep.generator(i)

    def interval(l):
        arc = A.wall(l)
        ends = ("minus", "plus") if arc.away_from_base else ("plus", "minus")
        return flag(l, ends[0]), flag(l, ends[1])

    def checked(test, label):
        try:
            return test()
        except nc.AmbiguousSignError as exc:
            report.violations.append(f"{label}: ambiguous sign ({exc})")
            return False

    for i in range(1, A.N + 1):
        for end in ("plus", "minus"):
            img = flag(-i, end).transform(act(i))
            if not checked(lambda: same_flag(img, flag(i, end)), f"pairing {fg.letter_name(i)}"):
                report.violations.append(f"generator {fg.letter_name(i)} does not map the {end} flag of its walls")
    # consecutive intervals (s1, e1), (s2, e2) in circle order have disjoint
    # closures iff (s1, e1, s2, e2) is a positive quadruple
    order = sorted(A.letters(), key=lambda l: fg.angle(A.schottky.far_interval(l).start))
    for a, b in zip(order, order[1:] + order[:1]):
        quad = (*interval(a), *interval(b))
        label = f"{fg.letter_name(a)}|{fg.letter_name(b)}"
        ok = checked(lambda: closure_nested(*quad), label)
        report.pairs_checked.append((fg.letter_name(a), fg.letter_name(b), ok))
        if not ok:
            report.violations.append(f"intervals of {fg.letter_name(a)} and {fg.letter_name(b)} are not nested apart")
    flags = [F for l in order for F in interval(l)]
    if not checked(lambda: is_positive_tuple(flags), "endpoint tuple"):
        report.violations.append("endpoint flags are not a positive tuple in circle order")
    report.passed = not report.violations
    return report


# ----------------------------------------------------------------------------
# serialization


def representation_to_json(rep: Representation, bmap: BoundaryMap | None = None) -> dict:
    from .flags import flag_to_json

    out = {
        "n": rep.n,
        "provenance": rep.provenance,
        "generators": [nc.array_to_json(g.M) for g in rep.gens],
    }
    if rep.sl2 is not None:
        out["sl2"] = [nc.array_to_json(g) for g in rep.sl2]
    if bmap is not None:
        out["boundary_flags"] = [
            {"letter": fg.letter_name(l), "end": end, "flag": flag_to_json(F, rep.J)}
            for (l, end), F in sorted(bmap.base.items())
        ]
    return out


def representation_from_json(data: dict) -> Representation:
    n = int(data["n"])
    gens = tuple(certify(nc.array_from_json(g), JForm(n)) for g in data["generators"])
    sl2 = tuple(nc.array_from_json(g) for g in data["sl2"]) if "sl2" in data else None
    model = monomial_model(sl2, n) if sl2 is not None and all(nc.is_exact(g) for g in sl2) else None
    return Representation(n, gens, data.get("provenance", "user-supplied"), sl2, model)


def boundary_flags_from_json(data: dict) -> dict:
    from .flags import flag_from_json

    return {
        (fg.parse_letter(e["letter"]), e["end"]): flag_from_json(e["flag"])
        for e in data.get("boundary_flags", [])
    }
