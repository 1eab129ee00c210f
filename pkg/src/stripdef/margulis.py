"""Neutral eigenvectors, Margulis invariants and the properness scan."""

from __future__ import annotations

import csv
import io
import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from . import freegroup as fg
from . import numcore as nc
from .cocycle import AffineDeformation
from .flags import JForm, OrientedFlag, is_positive_tuple, neutral_vector
from .posrep import BoundaryMap, Representation, sym_representation, veronese_flag


class NotRegularError(ValueError):
    pass


class RouteDisagreementError(ArithmeticError):
    def __init__(self, message, eigen_vector=None, flag_vector=None):
        super().__init__(message)
        self.eigen_vector = eigen_vector
        self.flag_vector = flag_vector


@dataclass(frozen=True, eq=False)
class RegularCertificate:
    word: fg.Word
    eigenvalues: np.ndarray
    attracting: OrientedFlag | None
    repelling: OrientedFlag | None
    neutral: np.ndarray
    gap: float
    route_residual: float
    exact_direction: np.ndarray | None = field(default=None, repr=False)
    orientation: int = 1

    def exact_alpha(self, u_exact, model) -> tuple[float, int]:
        """(alpha, exact sign) from a monomial-coordinate translation."""
        y = self.exact_direction
        num = model.dot(u_exact, y) * self.orientation
        q = model.dot(y, y)
        sign = (num > 0) - (num < 0)
        return float(num) / math.sqrt(float(q)), sign


def _sl2_eigenvalue(g) -> float:
    tr = abs(float(g[0, 0] + g[1, 1]))
    if tr <= 2.0:
        raise NotRegularError(f"|trace| = {tr} is not > 2")
    return (tr + math.sqrt(tr * tr - 4.0)) / 2.0


def _eigen_neutral(M: np.ndarray, J: JForm) -> tuple[np.ndarray, np.ndarray, float]:
    """Float eigen route: unit spacelike eigenvector for the eigenvalue closest to 1."""
    res = nc.eigen_real(M)
    if not (res.real and res.simple):
        raise NotRegularError("eigenvalues are not real and simple")
    vals = res.values
    k = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(res.pairs[k].vector)
    q = float(v @ J.matrix() @ v)
    if q <= 0:
        raise NotRegularError("neutral eigenvector is not spacelike")
    mags = np.sort(np.abs(vals))
    gap = float(np.min(np.diff(np.log(mags))))
    return vals, v / math.sqrt(q), gap


def _eigen_flags(M: np.ndarray, J: JForm) -> tuple[OrientedFlag, OrientedFlag, np.ndarray]:
    """Attracting/repelling flags from eigenvectors, with the isotropic orientation rule."""
    res = nc.eigen_real(M)
    V = np.column_stack([np.real(p.vector) for p in res.pairs])
    d = J.d
    Jm = J.matrix()
    for i in range(1, J.mid + 1):
        if (-1) ** i * (V[:, i - 1] @ Jm @ V[:, d - i]) < 0:
            V[:, d - i] = -V[:, d - i]
    if np.linalg.det(V) < 0:
        V[:, J.mid] = -V[:, J.mid]
    from .flags import opposite_basis

    return OrientedFlag(V), OrientedFlag(opposite_basis(V)), V[:, J.mid]


@lru_cache(maxsize=None)
def _reference_neutral(n: int) -> np.ndarray:
    return neutral_vector(veronese_flag("inf", n), veronese_flag(0, n), JForm(n))


def flag_route_neutral(p_plus, p_minus, n: int) -> np.ndarray:
    """neutral_vector(xi(p+), xi(p-)) evaluated through SL2 equivariance.

    With h(oo) = p+ and h(0) = p-, both the Veronese flags and their
    adapted J-basis move by sigma(h), so the answer is sigma(h) applied to
    the neutral vector of the pair (xi(oo), xi(0)). This stays well
    conditioned when p+ and p- are close.
    """
    h = np.array([[float(p_plus[0]), float(p_minus[0])], [float(p_plus[1]), float(p_minus[1])]])
    det = np.linalg.det(h)
    if det < 0:
        h[:, 1] = -h[:, 1]
        det = -det
    h = h / math.sqrt(det)
    return sym_representation(h, n).M @ _reference_neutral(n)


def neutral_of_element(w, rep: Representation, bmap: BoundaryMap | None = None,
                       tol: float = 1e-7) -> RegularCertificate:
    """x0(rho(w)) with the positive orientation, computed two ways.

    The eigen route takes the eigenvalue-1 eigenvector of rho(w) (exactly,
    as a rational nullspace vector, when a monomial model exists). The flag
    route takes the middle vector of the J-basis adapted to the Veronese
    flags at the fixed points of w. The eigen route adopts the flag route's
    orientation and the two must agree to ``tol``.
    """
    w = fg.Word(w)
    if not w:
        raise NotRegularError("the identity is not regular")
    J = rep.J
    m = 4 * rep.n - 2
    exact_dir = None
    attracting = repelling = None
    if rep.sl2 is not None:
        g = rep.sl2_matrix(w)
        lam = _sl2_eigenvalue(g)
        eigenvalues = np.array([lam ** (m - 2 * k) for k in range(m + 1)])
        gap = 2.0 * math.log(lam)
    if rep.monomial is not None:
        model = rep.monomial
        R = model.matrix(w)
        y = nc.nullspace_vector(R - nc.identity(J.d, exact=True))
        q = model.dot(y, y)
        if not q > 0:
            raise NotRegularError("neutral eigenvector is not spacelike")
        exact_dir = y
        x_eig = model.to_weight(y) / math.sqrt(float(q))
    elif rep.sl2 is not None:
        _, x_eig, _ = _eigen_neutral(rep.matrix(w), J)
    else:
        eigenvalues, x_eig, gap = _eigen_neutral(rep.matrix(w), J)

    if bmap is not None and bmap.evaluator is not None and rep.sl2 is not None:
        va, vr = fg.fixed_point_vectors(g)
        attracting, repelling = bmap(tuple(va)), bmap(tuple(vr))
        x_flag = flag_route_neutral(va, vr, rep.n)
    else:
        attracting, repelling, x_flag = _eigen_flags(rep.matrix(w), J)
        x_flag = x_flag / math.sqrt(float(x_flag @ J.matrix() @ x_flag))
    orientation = 1 if float(x_eig @ x_flag) >= 0 else -1
    x_eig = orientation * x_eig
    residual = float(np.max(np.abs(x_eig - x_flag)))
    if residual > tol:
        raise RouteDisagreementError(
            f"neutral vector routes disagree for {w}: {residual:.3g}", x_eig, x_flag)
    return RegularCertificate(w, eigenvalues, attracting, repelling, x_eig, gap, residual,
                              exact_dir, orientation)


def translation_length(w, rep: Representation) -> float:
    """Hyperbolic translation length of the underlying SL2 word, or its
    spectral analogue 2 log|lambda_1| / (4n - 2) for other representations."""
    if rep.sl2 is not None:
        return fg.translation_length(rep.sl2_matrix(w))
    vals = nc.eigen_real(rep.matrix(w)).values
    return 2.0 * math.log(abs(vals[0])) / (4 * rep.n - 2)


def margulis_invariant(w, deformation: AffineDeformation, bmap: BoundaryMap | None = None,
                       cert: RegularCertificate | None = None) -> float:
    """alpha_u(w) = u(w) . x0(rho(w))."""
    rep = deformation.rep
    cert = cert or neutral_of_element(w, rep, bmap)
    if deformation.exact and cert.exact_direction is not None:
        return cert.exact_alpha(deformation.u(w, exact=True), rep.monomial)[0]
    return float(rep.J.dot(deformation.u(w), cert.neutral))


def conjugacy_invariance_check(w, h, deformation: AffineDeformation, bmap: BoundaryMap | None = None) -> float:
    w, h = fg.Word(w), fg.Word(h)
    return margulis_invariant(h * w * h.inverse(), deformation, bmap) - margulis_invariant(w, deformation, bmap)


@dataclass
class MargulisRecord:
    word: fg.Word
    alpha: float
    length: float
    sign: int
    route_residual: float

    @property
    def ratio(self) -> float:
        return self.alpha / self.length


@dataclass
class MargulisReport:
    records: list[MargulisRecord]
    max_len: int
    dedupe: bool
    c0: float = 0.0
    margin: float = 1e-9

    @property
    def min_ratio(self) -> float:
        return min(r.ratio for r in self.records)

    @property
    def argmin(self) -> MargulisRecord:
        return min(self.records, key=lambda r: r.ratio)

    @property
    def nonpositive(self) -> list[MargulisRecord]:
        return [r for r in self.records if r.sign <= 0]

    @property
    def positive(self) -> list[MargulisRecord]:
        return [r for r in self.records if r.sign > 0]

    @property
    def witness(self) -> tuple[MargulisRecord, MargulisRecord] | None:
        """An opposite-sign or zero pair certifying failure of properness."""
        bad = self.nonpositive
        if not bad:
            return None
        good = self.positive
        return (bad[0], good[0] if good else bad[0])

    @property
    def passed(self) -> bool:
        return not self.nonpositive and self.min_ratio > self.c0 + self.margin

    @property
    def max_route_residual(self) -> float:
        return max(r.route_residual for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "length", "t", "alpha", "ratio"])
        for r in self.records:
            writer.writerow([str(r.word), len(r.word), f"{r.length:.17g}", f"{r.alpha:.17g}", f"{r.ratio:.17g}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        wit = self.witness
        return {
            "status": "PASS" if self.passed else "FAIL",
            "max_len": self.max_len,
            "representatives": "conjugacy" if self.dedupe else "all",
            "words": len(self.records),
            "min_ratio": self.min_ratio,
            "argmin": str(self.argmin.word),
            "c0": self.c0,
            "max_route_residual": self.max_route_residual,
            "witness": None if wit is None else [str(wit[0].word), str(wit[1].word)],
        }


def properness_scan(deformation: AffineDeformation, L: int, bmap: BoundaryMap | None = None,
                    dedupe: bool = True, c0: float = 0.0, margin: float = 1e-9) -> MargulisReport:
    """Margulis invariants of all words (or conjugacy representatives) up to length L."""
    if L < 1:
        raise ValueError("scan length must be at least 1")
    rep = deformation.rep
    N = rep.N
    words = fg.conjugacy_representatives(N, L) if dedupe else list(fg.enumerate_words(N, L))
    records = []
    use_exact = deformation.exact and rep.monomial is not None
    for w in words:
        try:
            cert = neutral_of_element(w, rep, bmap)
        except NotRegularError as exc:
            raise NotRegularError(f"word {w}: {exc}") from exc
        if use_exact:
            alpha, sign = cert.exact_alpha(deformation.u(w, exact=True), rep.monomial)
        else:
            alpha = float(rep.J.dot(deformation.u(w), cert.neutral))
            scale = max(1.0, float(np.max(np.abs(deformation.u(w)))))
            sign = nc.sign_of(alpha, scale) if abs(alpha) > nc.tolerance().eps_sign * scale else 0
        records.append(MargulisRecord(w, alpha, translation_length(w, rep), sign, cert.route_residual))
    return MargulisReport(records, L, dedupe, c0, margin)


def neutral_monotonicity_check(g, h, F: OrientedFlag, bmap: BoundaryMap, f=None) -> bool | None:
    """x0(g) . f <= x0(h) . f when (xi(g+), F, xi(g-), xi(h-), xi(h+)) is positive.

    Returns None when the cyclic-order hypothesis fails.
    """
    rep = bmap.rep
    cg, ch = neutral_of_element(g, rep, bmap), neutral_of_element(h, rep, bmap)
    if fg.Word(g) != fg.Word(h):
        try:
            ordered = is_positive_tuple([cg.attracting, F, cg.repelling, ch.repelling, ch.attracting])
        except nc.AmbiguousSignError:
            return None
        if not ordered:
            return None
    f = F.line() if f is None else np.asarray(f)
    J = rep.J
    return bool(J.dot(cg.neutral, f) <= J.dot(ch.neutral, f) + 1e-10)
