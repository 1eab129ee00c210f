"""Scalar backends, dense matrices, minors and total-positivity tests.

Two backends are supported and chosen by the dtype of the numpy array:

* exact: ``dtype=object`` arrays holding :class:`fractions.Fraction` entries;
* float: ``float64`` arrays, where every sign decision consults the ambient
  :class:`ToleranceContext`.

Exact sign decisions are made on integer matrices (rows cleared of
denominators) with fraction-free Bareiss elimination, which keeps the
initial-minor sweeps fast enough for thousands of 7x7 matrices.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class AmbiguousSignError(ArithmeticError):
    """A float quantity is too close to zero to decide its sign."""

    def __init__(self, message: str, where=None):
        super().__init__(message)
        self.where = where


class SingularMatrixError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ToleranceContext:
    eps_sign: float = 1e-9
    eps_eq: float = 1e-8

    def __post_init__(self):
        if not self.eps_sign > 0:
            raise ValueError("eps_sign must be positive")
        if self.eps_eq < self.eps_sign:
            raise ValueError("eps_eq must be >= eps_sign")


_TOLERANCE: contextvars.ContextVar[ToleranceContext] = contextvars.ContextVar(
    "stripdef_tolerance", default=ToleranceContext()
)


def tolerance() -> ToleranceContext:
    """The ambient tolerance context."""
    return _TOLERANCE.get()


@contextlib.contextmanager
def use_tolerance(ctx: ToleranceContext | None = None, **overrides) -> Iterator[ToleranceContext]:
    """Temporarily replace the ambient tolerance context."""
    base = ctx if ctx is not None else tolerance()
    if overrides:
        base = ToleranceContext(**{**base.__dict__, **overrides})
    token = _TOLERANCE.set(base)
    try:
        yield base
    finally:
        _TOLERANCE.reset(token)


# ----------------------------------------------------------------------------
# conversions


def frac(x) -> Fraction:
    """Parse a rational from an int, Fraction, float or ``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def is_exact(M) -> bool:
    return isinstance(M, np.ndarray) and M.dtype == object


def exact_array(M) -> np.ndarray:
    """Copy of ``M`` as an object array of Fractions."""
    A = np.asarray(M, dtype=object)
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        out[idx] = frac(v)
    return out


def float_array(M) -> np.ndarray:
    return np.asarray(M, dtype=float) if not is_exact(M) else np.vectorize(float, otypes=[float])(M)


def like(M, values) -> np.ndarray:
    """Convert ``values`` to the backend of ``M``."""
    return exact_array(values) if is_exact(M) else np.asarray(values, dtype=float)


def identity(d: int, exact: bool = False) -> np.ndarray:
    if exact:
        I = np.full((d, d), Fraction(0), dtype=object)
        for i in range(d):
            I[i, i] = Fraction(1)
        return I
    return np.eye(d)


def zeros(shape, exact: bool = False) -> np.ndarray:
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def inf_norm(M) -> float:
    A = np.atleast_2d(float_array(M))
    return float(np.abs(A).sum(axis=1).max()) if A.size else 0.0


def sign_of(x, scale: float = 1.0, where=None) -> int:
    """Sign of a scalar; floats below ``eps_sign * max(1, scale)`` are ambiguous."""
    if isinstance(x, Fraction) or isinstance(x, (int, np.integer)):
        return (x > 0) - (x < 0)
    x = float(x)
    if abs(x) <= tolerance().eps_sign * max(1.0, scale):
        raise AmbiguousSignError(f"sign of {x:.3e} is below tolerance", where)
    return 1 if x > 0 else -1


# ----------------------------------------------------------------------------
# exact elimination


def _integer_rows(M: np.ndarray) -> list[list[int]]:
    rows = []
    for row in M:
        row = [frac(v) for v in row]
        lcm = 1
        for v in row:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        rows.append([int(v * lcm) for v in row])
    return rows


def _bareiss_det(rows: list[list[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    A = [r[:] for r in rows]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            Ai, Ak = A[i], A[k]
            for j in range(k + 1, n):
                Ai[j] = (Ai[j] * akk - aik * Ak[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def _exact_det(M: np.ndarray) -> Fraction:
    n = M.shape[0]
    if n == 0:
        return Fraction(1)
    denom = 1
    rows = []
    for row in M:
        row = [frac(v) for v in row]
        lcm = 1
        for v in row:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        denom *= lcm
        rows.append([int(v * lcm) for v in row])
    return Fraction(_bareiss_det(rows), denom)


def det(M):
    """Determinant, exact on the exact backend."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("determinant of a non-square matrix")
    if is_exact(M):
        return _exact_det(M)
    return float(np.linalg.det(M)) if M.shape[0] else 1.0


def _check_index_set(idx: Sequence[int], bound: int, name: str) -> list[int]:
    idx = [int(i) for i in idx]
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"{name} indices must be strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= bound):
        raise IndexError(f"{name} index out of bounds")
    return idx


def minor(M, rows: Sequence[int], cols: Sequence[int]):
    """Determinant of the submatrix on ``rows`` x ``cols`` (0-based)."""
    M = np.asarray(M)
    rows = _check_index_set(rows, M.shape[0], "row")
    cols = _check_index_set(cols, M.shape[1], "column")
    if len(rows) != len(cols) or not rows:
        raise ValueError("minor needs equally many rows and columns, at least one")
    return det(M[np.ix_(rows, cols)])


def hadamard_bound(M) -> float:
    A = float_array(M)
    return float(np.prod(np.linalg.norm(A, axis=0))) if A.size else 1.0


def det_sign(M, where=None) -> int:
    """Sign of ``det M``.

    Exact arrays are never ambiguous. For floats the determinant is compared
    with ``eps_sign`` times the Hadamard bound (product of column norms);
    below it the sign is reported as 0 when the columns are numerically
    dependent, otherwise :class:`AmbiguousSignError` is raised.
    """
    M = np.asarray(M)
    if is_exact(M):
        if M.shape[0] == 0:
            return 1
        v = _bareiss_det(_integer_rows(M))
        return (v > 0) - (v < 0)
    if M.shape[0] == 0:
        return 1
    bound = hadamard_bound(M)
    if bound == 0.0:
        return 0
    value = float(np.linalg.det(M))
    if abs(value) <= tolerance().eps_sign * bound:
        if np.linalg.matrix_rank(M / np.linalg.norm(M, axis=0), tol=1e-12) < M.shape[0]:
            return 0
        raise AmbiguousSignError(
            f"determinant {value:.3e} within tolerance of zero (scale {bound:.3e})", where
        )
    return 1 if value > 0 else -1


def normalized_det(M) -> float:
    """``det M`` divided by the Hadamard bound; lies in [-1, 1]."""
    A = float_array(M)
    bound = hadamard_bound(A)
    return float(np.linalg.det(A)) / bound if bound else 0.0


# ----------------------------------------------------------------------------
# total positivity


def _minor_sign(M: np.ndarray, rows, cols) -> int:
    return det_sign(M[np.ix_(rows, cols)], where=(tuple(rows), tuple(cols)))


def initial_minor_index_sets(d: int) -> Iterator[tuple[list[int], list[int]]]:
    """Index sets of the initial minors of a ``d x d`` matrix.

    For each entry (i, j) this is the largest contiguous minor having (i, j)
    as its bottom-right corner, so it touches the first row or column.
    """
    for i in range(d):
        for j in range(d):
            k = min(i, j) + 1
            yield list(range(i - k + 1, i + 1)), list(range(j - k + 1, j + 1))


def is_totally_positive(M) -> bool:
    """All minors strictly positive, via the d^2 initial minors (Gasca-Pena)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("total positivity needs a square matrix")
    return all(_minor_sign(M, r, c) > 0 for r, c in initial_minor_index_sets(M.shape[0]))


def all_minors(d: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    for k in range(1, d + 1):
        for rows in itertools.combinations(range(d), k):
            for cols in itertools.combinations(range(d), k):
                yield rows, cols


def is_totally_positive_bruteforce(M) -> bool:
    """Oracle: every minor of every order is strictly positive."""
    M = np.asarray(M)
    return all(_minor_sign(M, list(r), list(c)) > 0 for r, c in all_minors(M.shape[0]))


def structurally_nonzero(rows, cols, side: str) -> bool:
    """Whether a minor of a generic triangular matrix can be nonzero.

    For lower triangular matrices the minor on sorted ``rows``/``cols`` is
    identically zero unless ``rows[t] >= cols[t]`` for every position t.
    """
    if side == "lower":
        return all(r >= c for r, c in zip(rows, cols))
    if side == "upper":
        return all(r <= c for r, c in zip(rows, cols))
    raise ValueError(f"side must be 'upper' or 'lower', not {side!r}")


def _is_triangular(M: np.ndarray, side: str) -> bool:
    d = M.shape[0]
    scale = max(1.0, inf_norm(M))
    for i in range(d):
        for j in range(d):
            off = j > i if side == "lower" else j < i
            if off:
                v = M[i, j]
                if is_exact(M):
                    if v != 0:
                        return False
                elif abs(float(v)) > tolerance().eps_eq * scale:
                    return False
    return True


def is_triangular_totally_positive(M, side: str = "lower") -> bool:
    """Triangular total positivity via initial minors.

    A lower triangular matrix is totally positive in the triangular sense
    iff the minors on consecutive rows ending at row i and the first k
    columns are positive, for all k <= i. Upper triangular matrices are
    tested through their transpose.
    """
    M = np.asarray(M)
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', not {side!r}")
    if not _is_triangular(M, side):
        raise ValueError(f"matrix is not {side} triangular")
    L = M if side == "lower" else M.T
    d = L.shape[0]
    for i in range(d):
        for k in range(1, i + 2):
            if _minor_sign(L, list(range(i - k + 1, i + 1)), list(range(k))) <= 0:
                return False
    return True


def is_triangular_totally_positive_bruteforce(M, side: str = "lower") -> bool:
    """Oracle: all minors not forced to vanish by triangularity are positive."""
    M = np.asarray(M)
    return all(
        _minor_sign(M, list(r), list(c)) > 0
        for r, c in all_minors(M.shape[0])
        if structurally_nonzero(r, c, side)
    )


# ----------------------------------------------------------------------------
# linear algebra


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray


@dataclass
class EigenResult:
    pairs: list[EigenPair]
    real: bool
    simple: bool

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs])


def eigen_real(M) -> EigenResult:
    """Real eigenpairs sorted by decreasing modulus.

    ``real`` is False when some eigenvalue has an imaginary part above
    ``eps_eq`` (relative), and only the real pairs are returned then.
    ``simple`` reports whether the real eigenvalues are pairwise distinct.
    """
    A = float_array(M)
    w, V = np.linalg.eig(A)
    eps = tolerance().eps_eq
    scale = max(1.0, float(np.abs(w).max())) if w.size else 1.0
    real_mask = np.abs(w.imag) <= eps * scale
    pairs = [
        EigenPair(float(w[k].real), np.real(V[:, k]) / np.linalg.norm(np.real(V[:, k])))
        for k in np.flatnonzero(real_mask)
    ]
    pairs.sort(key=lambda p: -abs(p.value))
    vals = np.array([p.value for p in pairs])
    simple = all(
        abs(a - b) > eps * max(1.0, abs(a), abs(b))
        for a, b in itertools.combinations(vals, 2)
    )
    return EigenResult(pairs=pairs, real=bool(real_mask.all()), simple=simple)


def solve(M, b):
    """Solve ``M x = b``; exact Gauss-Jordan elimination on the exact backend."""
    M = np.asarray(M)
    b = np.asarray(b)
    if not is_exact(M):
        try:
            cond = np.linalg.cond(float_array(M))
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(str(exc)) from exc
        if not np.isfinite(cond) or cond > 1.0 / tolerance().eps_sign:
            raise SingularMatrixError(f"matrix is numerically singular (cond={cond:.3e})")
        return np.linalg.solve(float_array(M), float_array(b))
    n = M.shape[0]
    rhs = b.reshape(n, -1)
    A = np.empty((n, n + rhs.shape[1]), dtype=object)
    A[:, :n] = exact_array(M)
    A[:, n:] = exact_array(rhs)
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r, k] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular matrix")
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
        A[k] = A[k] / A[k, k]
        for r in range(n):
            if r != k and A[r, k] != 0:
                A[r] = A[r] - A[r, k] * A[k]
    x = A[:, n:]
    return x.reshape(b.shape)


def inverse(M):
    M = np.asarray(M)
    return solve(M, identity(M.shape[0], exact=is_exact(M)))


def nullspace_vector(M):
    """A basis vector of a one-dimensional right kernel."""
    M = np.asarray(M)
    if is_exact(M):
        A = exact_array(M)
        rows, cols = A.shape
        pivots = []
        r = 0
        for c in range(cols):
            piv = next((i for i in range(r, rows) if A[i, c] != 0), None)
            if piv is None:
                continue
            A[[r, piv]] = A[[piv, r]]
            A[r] = A[r] / A[r, c]
            for i in range(rows):
                if i != r and A[i, c] != 0:
                    A[i] = A[i] - A[i, c] * A[r]
            pivots.append(c)
            r += 1
            if r == rows:
                break
        free = [c for c in range(cols) if c not in pivots]
        if len(free) != 1:
            raise SingularMatrixError(f"kernel has dimension {len(free)}, expected 1")
        x = np.full(cols, Fraction(0), dtype=object)
        f = free[0]
        x[f] = Fraction(1)
        for i, c in enumerate(pivots):
            x[c] = -A[i, f]
        return x
    A = float_array(M)
    _, s, Vt = np.linalg.svd(A)
    full = np.zeros(A.shape[1])
    full[: len(s)] = s
    scale = max(1.0, float(s[0])) if s.size else 1.0
    small = np.flatnonzero(full <= tolerance().eps_eq * scale)
    if len(small) != 1:
        raise SingularMatrixError(f"kernel has dimension {len(small)}, expected 1")
    return Vt[-1]


def exact_sqrt(x: Fraction) -> Fraction | None:
    """Rational square root when one exists."""
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def max_abs(M) -> float:
    A = float_array(np.asarray(M))
    return float(np.abs(A).max()) if A.size else 0.0


# ----------------------------------------------------------------------------
# serialization


def scalar_to_json(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return float(v)


def scalar_from_json(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def array_to_json(M) -> list:
    M = np.asarray(M)
    if M.ndim == 0:
        return scalar_to_json(M.item())
    return [array_to_json(row) for row in M]


def array_from_json(data) -> np.ndarray:
    """Rebuild an array; any string or int entry makes the whole array exact."""

    def leaves(x) -> Iterable:
        if isinstance(x, list):
            for y in x:
                yield from leaves(y)
        else:
            yield x

    flat = list(leaves(data))
    if any(isinstance(v, (str, int)) and not isinstance(v, bool) for v in flat):
        if all(isinstance(v, (str, int)) for v in flat):
            return exact_array(np.array(data, dtype=object))
    return np.array(data, dtype=float)


# ----------------------------------------------------------------------------
# random streams


def rng(seed=None) -> np.random.Generator:
    """Counter-based (Philox) generator; spawned SeedSequences give
    independent per-item streams that do not depend on evaluation order."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def seed_sequence(seed=None) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
