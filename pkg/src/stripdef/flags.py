"""Oriented flags in R^(4n-1), their partial cyclic order and J-bases.

An oriented flag is stored as a basis matrix whose first ``i`` columns span
``F^(i)`` and whose ``i``-th column is positively oriented in
``F^(i)/F^(i-1)``. Two bases give the same oriented flag exactly when they
differ by an upper triangular matrix with positive diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import numcore as nc
from .numcore import AmbiguousSignError


class FlagError(ValueError):
    pass


class NotTransverseError(FlagError):
    pass


class RescalingInfeasibleError(FlagError):
    pass


# ----------------------------------------------------------------------------
# the form


@dataclass(frozen=True)
class JForm:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def d(self) -> int:
        return 4 * self.n - 1

    @property
    def mid(self) -> int:
        """0-based index of the middle basis vector e_{2n}."""
        return 2 * self.n - 1

    def matrix(self, exact: bool = False) -> np.ndarray:
        d = self.d
        J = nc.zeros((d, d), exact=exact)
        for r in range(1, d + 1):
            J[r - 1, d - r] = Fraction((-1) ** r) if exact else float((-1) ** r)
        return J

    def dot(self, u, v):
        """The form u . v."""
        J = self.matrix(exact=nc.is_exact(u) and nc.is_exact(v))
        return np.asarray(u) @ J @ np.asarray(v)

    def gram(self, B) -> np.ndarray:
        B = np.asarray(B)
        return B.T @ self.matrix(exact=nc.is_exact(B)) @ B

    def residual(self, M) -> float:
        """max |M^T J M - J|; zero for elements of O(2n, 2n-1)."""
        return nc.max_abs(self.gram(M) - self.matrix(exact=nc.is_exact(M)))


def form_for_dimension(d: int) -> JForm:
    if d < 3 or d % 4 != 3:
        raise ValueError(f"dimension {d} is not of the form 4n-1")
    return JForm((d + 1) // 4)


# ----------------------------------------------------------------------------
# oriented flags


def _orthonormal_frame(B: np.ndarray) -> np.ndarray:
    """Gram-Schmidt frame of the same oriented flag (B = Q R, diag R > 0)."""
    if not np.all(np.isfinite(B)):
        raise FlagError("flag basis has non-finite entries")
    Q, R = np.linalg.qr(B)
    diag = np.diag(R)
    norms = np.linalg.norm(B, axis=0)
    if np.any(norms == 0) or np.any(np.abs(diag) <= nc.tolerance().eps_sign * norms):
        raise FlagError("flag basis is not invertible")
    Q = Q * np.sign(diag)[None, :]
    if np.linalg.det(Q) < 0:
        raise FlagError("flag basis is negatively oriented")
    return Q


@dataclass(frozen=True, eq=False)
class OrientedFlag:
    """An oriented full flag; float bases are stored as orthonormal frames."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise FlagError("flag basis must be a square matrix")
        d = B.shape[0]
        if d < 3 or d % 2 == 0:
            raise FlagError("ambient dimension must be odd and at least 3")
        if not nc.is_exact(B):
            B = _orthonormal_frame(np.array(B, dtype=float))
        elif nc.det_sign(B) != 1:
            raise FlagError("flag basis must be invertible and positively oriented")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def exact(self) -> bool:
        return nc.is_exact(self.basis)

    def cols(self, k: int) -> np.ndarray:
        """The first ``k`` basis columns."""
        return self.basis[:, :k]

    def line(self) -> np.ndarray:
        """Positively oriented vector spanning F^(1)."""
        return self.basis[:, 0]

    def transform(self, g) -> "OrientedFlag":
        g = np.asarray(g)
        return OrientedFlag(g @ self.basis)

    def as_float(self) -> "OrientedFlag":
        return self if not self.exact else OrientedFlag(nc.float_array(self.basis))

    def canonical(self) -> np.ndarray:
        """Column-echelon representative with pivot entries of modulus one.

        Column j is reduced against earlier columns so it vanishes on their
        pivot rows, then scaled by a positive number so its largest entry
        has modulus one. The pivot row of each column is that largest entry.
        """
        B = self.basis.copy() if self.exact else np.array(self.basis, dtype=float)
        d = self.d
        pivots: list[int] = []
        for j in range(d):
            col = B[:, j].copy()
            for k, p in enumerate(pivots):
                col = col - col[p] * B[:, k]
            if self.exact:
                p = max((r for r in range(d) if r not in pivots), key=lambda r: abs(col[r]))
            else:
                masked = np.abs(col).astype(float)
                masked[pivots] = -1.0
                p = int(np.argmax(masked))
            col = col / abs(col[p])
            B[:, j] = col
            pivots.append(p)
        return B

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrientedFlag):
            return NotImplemented
        return same_flag(self, other)

    __hash__ = None  # type: ignore[assignment]


def same_flag(F: OrientedFlag, G: OrientedFlag) -> bool:
    """Whether two bases represent the same oriented flag.

    The change of basis from G to F must be upper triangular with positive
    diagonal (entrywise below-diagonal zero, exact or within ``eps_eq``).
    """
    if F.d != G.d:
        return False
    exact = F.exact and G.exact
    A = F.basis if exact else nc.float_array(F.basis)
    B = G.basis if exact else nc.float_array(G.basis)
    T = nc.solve(B, A)
    eps = nc.tolerance().eps_eq
    d = F.d
    if not exact:
        scale = np.linalg.norm(T, axis=0)
    for j in range(d):
        for i in range(j, d):
            v = T[i, j]
            if i > j:
                if exact and v != 0:
                    return False
                if not exact and abs(v) > eps * max(1.0, scale[j]):
                    return False
            elif exact and v <= 0:
                return False
            elif not exact and v <= eps * max(1.0, scale[j]):
                return False
    return True


def standard_flag(d: int, exact: bool = True) -> OrientedFlag:
    """Ascending standard flag <e1> < <e1,e2> < ..."""
    return OrientedFlag(nc.identity(d, exact=exact))


def opposite_basis(E) -> np.ndarray:
    """Columns (e_d, -e_{d-1}, e_{d-2}, ..., -e_2, e_1)."""
    E = np.asarray(E)
    d = E.shape[1]
    out = E[:, ::-1].copy()
    for k in range(d):
        if k % 2 == 1:
            out[:, k] = -out[:, k]
    return out


def flag_pair(E) -> tuple[OrientedFlag, OrientedFlag]:
    """The transverse pair (F_E, F_Ehat) of a positively oriented basis."""
    return OrientedFlag(E), OrientedFlag(opposite_basis(E))


# ----------------------------------------------------------------------------
# transversality and positivity


def _block_sign(blocks: Sequence[np.ndarray], where) -> int:
    return nc.det_sign(np.hstack(blocks), where=where)


def is_oriented_transverse(F: OrientedFlag, G: OrientedFlag) -> bool:
    """det(F_1..i | G_1..d-i) > 0 for every i."""
    if F.d != G.d:
        raise FlagError("flags live in different dimensions")
    d = F.d
    for i in range(d + 1):
        try:
            s = _block_sign([F.cols(i), G.cols(d - i)], where=i)
        except AmbiguousSignError as exc:
            raise AmbiguousSignError(f"transversality sweep ambiguous at i={i}", i) from exc
        if s != 1:
            return False
    return True


def triple_sweep(F: OrientedFlag, G: OrientedFlag, H: OrientedFlag):
    """Yield ((i, j, k), sign) for all i + j + k = d."""
    d = F.d
    for i in range(d + 1):
        for j in range(d + 1 - i):
            k = d - i - j
            try:
                s = _block_sign([F.cols(i), G.cols(j), H.cols(k)], where=(i, j, k))
            except AmbiguousSignError as exc:
                raise AmbiguousSignError(
                    f"triple sweep ambiguous at (i,j,k)={(i, j, k)}", (i, j, k)
                ) from exc
            yield (i, j, k), s


def triple_margin(F: OrientedFlag, G: OrientedFlag, H: OrientedFlag) -> float:
    """Smallest normalized determinant over the triple sweep (float)."""
    d = F.d
    Fb, Gb, Hb = (nc.float_array(X.basis) for X in (F, G, H))
    best = np.inf
    for i in range(d + 1):
        for j in range(d + 1 - i):
            k = d - i - j
            best = min(best, nc.normalized_det(np.hstack([Fb[:, :i], Gb[:, :j], Hb[:, :k]])))
    return float(best)


def is_positive_triple(F: OrientedFlag, G: OrientedFlag, H: OrientedFlag) -> bool:
    if not F.d == G.d == H.d:
        raise FlagError("flags live in different dimensions")
    return all(s == 1 for _, s in triple_sweep(F, G, H))


def is_positive_tuple(flags: Sequence[OrientedFlag]) -> bool:
    """Every ordered sub-triple (in the given cyclic order) is positive."""
    flags = list(flags)
    if len(flags) < 3:
        raise FlagError("a positive tuple needs at least three flags")
    k = len(flags)
    for a in range(k):
        for b in range(a + 1, k):
            for c in range(b + 1, k):
                if not is_positive_triple(flags[a], flags[b], flags[c]):
                    return False
    return True


def in_interval(X: OrientedFlag, F: OrientedFlag, G: OrientedFlag) -> bool:
    """X lies in the interval ((F, G)), i.e. (F, X, G) is positive."""
    return is_positive_triple(F, X, G)


def in_isotropic_interval(X: OrientedFlag, F: OrientedFlag, G: OrientedFlag, J: JForm) -> bool:
    return is_isotropic_flag(X, J) and in_interval(X, F, G)


def closure_nested(F, G, H, K) -> bool:
    """Positive quadruple test; certifies cl((G, H)) inside ((F, K))."""
    return is_positive_tuple([F, G, H, K])


# ----------------------------------------------------------------------------
# isotropy


def is_isotropic_flag(F: OrientedFlag, J: JForm) -> bool:
    """F^(i) is orthogonal to F^(d-i) and the quotient pairings have sign (-1)^(i+1).

    In the Gram matrix G = B^T J B this means G[r, s] = 0 whenever
    r + s <= d (1-based) and (-1)^r G[d+1-r, r] > 0.
    """
    if F.d != J.d:
        raise FlagError("flag and form dimensions differ")
    d = F.d
    G = J.gram(F.basis)
    exact = F.exact
    if not exact:
        norms = np.linalg.norm(nc.float_array(F.basis), axis=0)
    eps = nc.tolerance().eps_eq
    for r in range(1, d + 1):
        for s in range(1, d + 1 - r):
            v = G[r - 1, s - 1]
            if exact:
                if v != 0:
                    return False
            elif abs(float(v)) > eps * max(1.0, norms[r - 1] * norms[s - 1]):
                return False
    for r in range(1, d + 1):
        v = (-1) ** r * G[d - r, r - 1]
        scale = 1.0 if exact else norms[d - r] * norms[r - 1]
        if nc.sign_of(v, scale, where=r) != 1:
            return False
    return True


# ----------------------------------------------------------------------------
# adapted bases


def _intersection_line(F: OrientedFlag, G: OrientedFlag, i: int, k: int) -> np.ndarray:
    """Vector spanning F^(i) cap G^(k) (i + k = d + 1), positive in F^(i)/F^(i-1)."""
    A = np.hstack([F.cols(i), -G.cols(k)])
    coeffs = nc.nullspace_vector(A)
    c = coeffs[i - 1]
    s = nc.sign_of(c, float(nc.max_abs(coeffs)), where=i)
    coeffs = coeffs if s > 0 else -coeffs
    return F.cols(i) @ coeffs[:i]


def intersection_basis(F: OrientedFlag, G: OrientedFlag) -> np.ndarray:
    """Basis e_i spanning F^(i) cap G^(d+1-i), oriented by F.

    For an oriented transverse pair with F = F_E and G = F_Ehat this
    recovers E up to positive scalars.
    """
    if not is_oriented_transverse(F, G):
        raise NotTransverseError("flags are not oriented transverse")
    d = F.d
    exact = F.exact and G.exact
    if not exact:
        F, G = F.as_float(), G.as_float()
    cols = [_intersection_line(F, G, i, d + 1 - i) for i in range(1, d + 1)]
    E = np.column_stack(cols)
    if not exact:
        E = E / np.linalg.norm(E, axis=0)
    return E


@dataclass(frozen=True, eq=False)
class JBasisPair:
    """A J-basis E together with its flags F_E and F_Ehat."""

    E: np.ndarray = field(repr=False)
    J: JForm

    @property
    def F(self) -> OrientedFlag:
        return OrientedFlag(self.E)

    @property
    def F_hat(self) -> OrientedFlag:
        return OrientedFlag(opposite_basis(self.E))

    @property
    def E_hat(self) -> np.ndarray:
        return opposite_basis(self.E)

    @property
    def neutral(self) -> np.ndarray:
        return self.E[:, self.J.mid]

    def coordinates(self, v) -> np.ndarray:
        return nc.solve(self.E, v)


def _rescale(E: np.ndarray, J: JForm) -> np.ndarray:
    """Positive rescaling of the columns so that E^T J E = J."""
    d = J.d
    G = J.gram(E)
    exact = nc.is_exact(E)
    E = E.copy()
    for i in range(1, J.mid + 1):
        target = (-1) ** i
        p = G[i - 1, d - i]
        scale = 1.0 if exact else float(np.linalg.norm(E[:, i - 1]) * np.linalg.norm(E[:, d - i]))
        if nc.sign_of(p, scale, where=i) != target:
            raise RescalingInfeasibleError(f"pairing of e_{i} and e_{d + 1 - i} has the wrong sign")
        E[:, d - i] = E[:, d - i] * (target / p if exact else target / float(p))
    m = J.mid
    p = G[m, m]
    scale = 1.0 if exact else float(np.linalg.norm(E[:, m]) ** 2)
    if nc.sign_of(p, scale, where=m + 1) != 1:
        raise RescalingInfeasibleError("middle vector is not spacelike")
    if exact:
        root = nc.exact_sqrt(p)
        if root is None:
            E = nc.float_array(E)
            E[:, m] = E[:, m] / np.sqrt(float(p))
        else:
            E[:, m] = E[:, m] / root
    else:
        E[:, m] = E[:, m] / np.sqrt(float(p))
    if not exact:
        # balance each dual pair so both vectors have comparable norm
        for i in range(1, J.mid + 1):
            a, b = np.linalg.norm(E[:, i - 1]), np.linalg.norm(E[:, d - i])
            t = np.sqrt(b / a)
            E[:, i - 1] *= t
            E[:, d - i] /= t
    return E


def adapted_J_basis(F: OrientedFlag, G: OrientedFlag, J: JForm) -> JBasisPair:
    """Positively oriented J-basis E with F = F_E and G = F_Ehat."""
    if F.d != J.d or G.d != J.d:
        raise FlagError("flag and form dimensions differ")
    E = _rescale(intersection_basis(F, G), J)
    pair = JBasisPair(E, J)
    if not same_flag(pair.F_hat, G):
        raise RescalingInfeasibleError("opposite basis does not reproduce the second flag")
    return pair


def neutral_vector(F: OrientedFlag, G: OrientedFlag, J: JForm) -> np.ndarray:
    """Middle vector e_{2n} of the adapted J-basis; unit spacelike."""
    return adapted_J_basis(F, G, J).neutral


def middle_vector(X: OrientedFlag, Y: OrientedFlag, J: JForm) -> np.ndarray:
    """Unit spacelike generator of X^(2n) cap Y^(2n), positive in X^(2n)/X^(2n-1).

    Only the middle vector needs to be spacelike, so X may be non-isotropic.
    """
    m = J.mid
    exact = X.exact and Y.exact
    if not exact:
        X, Y = X.as_float(), Y.as_float()
    if not is_oriented_transverse(X, Y):
        raise NotTransverseError("flags are not oriented transverse")
    x = _intersection_line(X, Y, m + 1, m + 1)
    q = J.dot(x, x)
    scale = 1.0 if exact else float(np.dot(x, x))
    if nc.sign_of(q, scale) != 1:
        raise RescalingInfeasibleError("middle vector is not spacelike")
    if exact:
        root = nc.exact_sqrt(q)
        if root is not None:
            return x / root
        x = nc.float_array(x)
    return x / np.sqrt(float(q))


def neutral_functional(X: OrientedFlag, Y: OrientedFlag, v, J: JForm):
    """Coefficient c in v = x + c x0(X, Y) + y with x in X^(2n-1), y in Y^(2n-1)."""
    m = J.mid
    x0 = middle_vector(X, Y, J)
    exact = nc.is_exact(x0) and nc.is_exact(np.asarray(v))
    Xb = X.basis if exact else nc.float_array(X.basis)
    Yb = Y.basis if exact else nc.float_array(Y.basis)
    x0 = x0 if exact else nc.float_array(x0)
    A = np.column_stack([Xb[:, :m], x0, Yb[:, :m]])
    coeffs = nc.solve(A, v if exact else nc.float_array(np.asarray(v)))
    return coeffs[m]


# ----------------------------------------------------------------------------
# random flags in intervals


def lower_unipotent_tp(d: int, rng: np.random.Generator, exact: bool = False,
                       low: float = 0.2, high: float = 2.0) -> np.ndarray:
    """Random unipotent lower triangular totally positive matrix.

    Product of elementary matrices I + t E_{i+1,i} along the reduced word
    (s_{d-1})(s_{d-2} s_{d-1})... of the longest permutation, with
    positive parameters.
    """
    U = nc.identity(d, exact=exact)
    for start in range(d - 1, 0, -1):
        for i in range(start, d):
            t = rng.uniform(low, high)
            if exact:
                t = Fraction(int(round(t * 8)) or 1, 8)
            step = nc.identity(d, exact=exact)
            step[i, i - 1] = t
            U = U @ step
    return U


def interval_basis(F: OrientedFlag, G: OrientedFlag) -> np.ndarray:
    """Basis E with F = F_E and G = F_Ehat (not necessarily a J-basis)."""
    E = intersection_basis(F, G)
    if not same_flag(OrientedFlag(opposite_basis(E)), G):
        raise FlagError("pair does not admit a basis with G = F_Ehat")
    return E


def random_flag_in_interval(F: OrientedFlag, G: OrientedFlag, seed=None,
                            J: JForm | None = None) -> OrientedFlag:
    """Flag spanned by the columns of E U, a point of ((F, G)).

    With a form ``J`` the pair must be isotropic; E is then the adapted
    J-basis and U is drawn from the lower positive semigroup of
    SO(2n, 2n-1), so the result is isotropic as well.
    """
    rng = np.random.default_rng(seed)
    if J is None:
        E = interval_basis(F, G)
        U = lower_unipotent_tp(F.d, rng, exact=nc.is_exact(E))
    else:
        from .posrep import lower_semigroup_element

        E = adapted_J_basis(F, G, J).E
        params = rng.uniform(0.2, 2.0, size=(2 * J.n - 1) ** 2)
        if nc.is_exact(E):
            params = [Fraction(int(round(p * 8)) or 1, 8) for p in params]
        U = lower_semigroup_element(J.n, params)
        if not nc.is_exact(E):
            U = nc.float_array(U)
    return OrientedFlag(E @ U)


# ----------------------------------------------------------------------------
# serialization


def flag_to_json(F: OrientedFlag, J: JForm | None = None) -> dict:
    J = J or form_for_dimension(F.d)
    return {
        "n": J.n,
        "basis": nc.array_to_json(F.canonical()),
        "isotropic": bool(is_isotropic_flag(F, J)),
    }


def flag_from_json(data: dict) -> OrientedFlag:
    F = OrientedFlag(nc.array_from_json(data["basis"]))
    if F.d != 4 * int(data["n"]) - 1:
        raise FlagError("flag dimension does not match n")
    return F
