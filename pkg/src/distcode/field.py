"""Exact arithmetic and dense linear algebra over a prime field GF(p).

Field elements are canonical Python integers in ``[0, p)``.  A
:class:`FieldContext` fixes the modulus and supplies scalar operations;
:class:`FieldMatrix` stores a dense matrix of reduced entries.  On top of
those, this module provides Gaussian elimination utilities: :func:`solve`
returns consistency, one particular solution, a nullspace basis and the set
of *pinned* coordinates (coordinates that take the same value in every
solution), which is what the feasibility decoder consumes.

Matrices are backed by numpy.  For moduli up to ``_INT64_SAFE_P`` the entries
live in ``int64`` (entrywise products of reduced values cannot overflow);
larger moduli fall back to object arrays of Python integers, trading speed
for unbounded precision.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DivisionByZero,
    ModulusTooSmall,
    NonPrimeModulus,
)

FieldElement = int

DEFAULT_PRIME = 2**31 - 1

# Largest p with (p-1)^2 < 2^63, so a*b of reduced entries fits in int64.
_INT64_SAFE_P = 3_037_000_499

_LARGE_FIELD_FLOOR = 1 << 16

# Deterministic Miller-Rabin witness set, exact for n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact below 3.3e24)."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldContext:
    """Scalar arithmetic in GF(p) with canonical representatives.

    The constructor only requires ``p`` to be prime, so unit tests may build
    small fields directly.  Production code should go through
    :func:`field_new`, which additionally enforces the large-field floor.
    """

    __slots__ = ("p", "dtype")

    def __init__(self, p: int):
        p = int(p)
        if not is_prime(p):
            raise NonPrimeModulus(f"{p} is not prime")
        self.p = p
        self.dtype = np.int64 if p <= _INT64_SAFE_P else object

    def element(self, x: int) -> FieldElement:
        return int(x) % self.p

    def add(self, a: int, b: int) -> FieldElement:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> FieldElement:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> FieldElement:
        return (a * b) % self.p

    def neg(self, a: int) -> FieldElement:
        return (-a) % self.p

    def inv(self, a: int) -> FieldElement:
        """Multiplicative inverse; raises :class:`DivisionByZero` on 0."""
        a = a % self.p
        if a == 0:
            raise DivisionByZero("0 has no multiplicative inverse")
        return pow(a, -1, self.p)

    def rand(self, rng) -> FieldElement:
        return rng.randrange(self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldContext) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("FieldContext", self.p))

    def __repr__(self) -> str:
        return f"FieldContext(p={self.p})"


def field_new(p: int) -> FieldContext:
    """Create a production field context.

    Args:
        p: prime modulus, at least ``2**16``.

    Raises:
        NonPrimeModulus: primality test failed.
        ModulusTooSmall: prime but below the large-field floor.
    """
    ctx = FieldContext(p)
    if ctx.p < _LARGE_FIELD_FLOOR:
        raise ModulusTooSmall(f"p={p} is below the 2**16 large-field floor")
    return ctx


class FieldMatrix:
    """Dense row-major matrix over GF(p); immutable after construction."""

    __slots__ = ("ctx", "_a")

    def __init__(self, ctx: FieldContext, entries):
        a = np.array(entries, dtype=object)
        if a.ndim != 2 or a.size == 0:
            raise DimensionMismatch("entries must form a non-empty 2-D grid")
        a = a % ctx.p
        self.ctx = ctx
        self._a = a.astype(ctx.dtype)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, ctx: FieldContext, rows: int, cols: int) -> "FieldMatrix":
        return cls(ctx, np.zeros((rows, cols), dtype=object))

    @classmethod
    def identity(cls, ctx: FieldContext, n: int) -> "FieldMatrix":
        return cls(ctx, np.eye(n, dtype=object))

    @classmethod
    def _wrap(cls, ctx: FieldContext, reduced: np.ndarray) -> "FieldMatrix":
        # Internal: adopt an already-reduced array without copying.
        m = cls.__new__(cls)
        m.ctx = ctx
        m._a = reduced
        return m

    # -- structure ---------------------------------------------------------

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    def __getitem__(self, key) -> FieldElement:
        i, j = key
        return int(self._a[i, j])

    def row(self, i: int) -> tuple[FieldElement, ...]:
        return tuple(int(x) for x in self._a[i])

    def column(self, j: int) -> tuple[FieldElement, ...]:
        return tuple(int(x) for x in self._a[:, j])

    def submatrix(self, row_idx, col_idx) -> "FieldMatrix":
        rows = list(row_idx)
        cols = list(col_idx)
        return FieldMatrix._wrap(self.ctx, self._a[np.ix_(rows, cols)].copy())

    def to_rows(self) -> list[list[int]]:
        return [[int(x) for x in r] for r in self._a]

    # -- arithmetic ---------------------------------------------------------

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.ctx != other.ctx:
            raise DimensionMismatch("matrices from different fields")
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        p = self.ctx.p
        acc = np.zeros((self.rows, other.cols), dtype=self._a.dtype)
        # Accumulate one rank-1 term at a time so int64 never overflows.
        for k in range(self.cols):
            acc = (acc + self._a[:, k : k + 1] * other._a[k : k + 1, :]) % p
        return FieldMatrix._wrap(self.ctx, acc)

    def matvec(self, vec) -> tuple[FieldElement, ...]:
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length does not match column count")
        p = self.ctx.p
        out = []
        for i in range(self.rows):
            s = 0
            arow = self._a[i]
            for k, x in enumerate(vec):
                s = (s + int(arow[k]) * (int(x) % p)) % p
            out.append(s)
        return tuple(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and self.ctx == other.ctx
            and self._a.shape == other._a.shape
            and bool((self._a == other._a).all())
        )

    def __hash__(self):
        return hash((self.ctx.p, self._a.shape, tuple(int(x) for x in self._a.flat)))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.rows}x{self.cols}, p={self.ctx.p})"


@dataclass(frozen=True)
class SolveOutcome:
    """Full description of the solution set of ``A x = b`` over GF(p).

    ``pinned_coordinates`` holds the variable indices whose value is identical
    across every solution, i.e. those at which every nullspace basis vector
    vanishes.  When the system is inconsistent ``particular`` is ``None``; the
    nullspace data still describes ``A x = 0``.
    """

    consistent: bool
    particular: tuple[FieldElement, ...] | None
    nullspace_basis: tuple[tuple[FieldElement, ...], ...]
    pinned_coordinates: frozenset[int] = field(default_factory=frozenset)


def _rref_augmented(ctx: FieldContext, aug: np.ndarray, nvars: int):
    """Reduce ``aug`` (rows x (nvars+extra)) in place; pivot only on the
    first ``nvars`` columns.  Returns the list of pivot columns."""
    p = ctx.p
    nrows = aug.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(nvars):
        pr = None
        for i in range(r, nrows):
            if aug[i, c] != 0:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            aug[[r, pr]] = aug[[pr, r]]
        inv = pow(int(aug[r, c]), -1, p)
        aug[r] = (aug[r] * inv) % p
        factor = aug[:, c].copy()
        factor[r] = 0
        aug -= factor[:, None] * aug[r][None, :]
        aug %= p
        pivots.append(c)
        r += 1
    return pivots


def solve(A: FieldMatrix, b) -> SolveOutcome:
    """Solve ``A x = b`` exactly by Gauss-Jordan elimination.

    Args:
        A: coefficient matrix.
        b: right-hand side of length ``A.rows``.

    Returns:
        A :class:`SolveOutcome` with consistency flag, a particular solution
        (free variables set to zero), a nullspace basis of size
        ``cols - rank``, and the pinned coordinate set.

    Raises:
        DimensionMismatch: if ``len(b) != A.rows``.
    """
    if len(b) != A.rows:
        raise DimensionMismatch(f"b has length {len(b)}, expected {A.rows}")
    ctx = A.ctx
    p = ctx.p
    n = A.cols
    bcol = np.array([[int(x) % p] for x in b], dtype=object).astype(ctx.dtype)
    aug = np.concatenate([A._a.copy(), bcol], axis=1)
    pivots = _rref_augmented(ctx, aug, n)
    rank = len(pivots)

    consistent = all(int(aug[i, n]) == 0 for i in range(rank, A.rows))
    free = [c for c in range(n) if c not in set(pivots)]

    particular = None
    if consistent:
        x = [0] * n
        for i, c in enumerate(pivots):
            x[c] = int(aug[i, n])
        particular = tuple(x)

    basis = []
    for f in free:
        vec = [0] * n
        vec[f] = 1
        for i, c in enumerate(pivots):
            vec[c] = (-int(aug[i, f])) % p
        basis.append(tuple(vec))

    pinned = frozenset(
        c for i, c in enumerate(pivots) if all(int(aug[i, f]) == 0 for f in free)
    )
    return SolveOutcome(consistent, particular, tuple(basis), pinned)


def nullspace(A: FieldMatrix) -> tuple[tuple[FieldElement, ...], ...]:
    """Basis of ``{x : A x = 0}``."""
    return solve(A, [0] * A.rows).nullspace_basis


def rank(A: FieldMatrix) -> int:
    """Rank over GF(p) by forward elimination (inverse-free)."""
    a = A._a.copy()
    return int(_batch_forward_eliminate(a[None, :, :], A.ctx.p, A.cols)[0])


def submatrix_nonsingular(A: FieldMatrix, row_set, col_set) -> bool:
    """True iff the selected square submatrix has full rank.

    Raises:
        DimensionMismatch: if the row and column selections differ in size.
    """
    rows = sorted(row_set)
    cols = sorted(col_set)
    if len(rows) != len(cols):
        raise DimensionMismatch("row and column selections must have equal size")
    sub = A.submatrix(rows, cols)
    return rank(sub) == len(rows)


# ---------------------------------------------------------------------------
# Batched elimination kernels.
#
# These operate on a stack of matrices at once (shape (B, m, n)) and are the
# workhorse behind exhaustive MDS checks and the decoder's scenario sweep.
# Elimination is inverse-free: instead of normalizing pivots, non-pivot rows
# are scaled by the pivot value, which preserves rank and consistency.
# ---------------------------------------------------------------------------


def _batch_forward_eliminate(batch: np.ndarray, p: int, ncols: int) -> np.ndarray:
    """Forward-eliminate the first ``ncols`` columns of every matrix in the
    stack, in place.  Returns the per-matrix pivot count (= rank restricted
    to those columns)."""
    nbatch, nrows, _ = batch.shape
    r = np.zeros(nbatch, dtype=np.int64)
    rowidx = np.arange(nrows)
    one = 1 if batch.dtype == object else np.int64(1)
    for c in range(ncols):
        col = batch[:, :, c]
        nz = (col != 0) & (rowidx[None, :] >= r[:, None])
        has = nz.any(axis=1)
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        piv = nz[idx].argmax(axis=1)
        rr = r[idx]
        # Swap the first usable row up to the pivot position.
        tmp = batch[idx, rr, :].copy()
        batch[idx, rr, :] = batch[idx, piv, :]
        batch[idx, piv, :] = tmp

        pivval = np.full(nbatch, one, dtype=batch.dtype)
        pivrow = np.zeros((nbatch, batch.shape[2]), dtype=batch.dtype)
        pivval[idx] = batch[idx, rr, c]
        pivrow[idx] = batch[idx, rr, :]

        limit = np.where(has, r, nrows)
        below = rowidx[None, :] > limit[:, None]
        factor = np.where(below, col, 0)

        # row_i <- row_i * pivot - pivot_row * row_i[c]; scaling non-pivot
        # rows by a nonzero constant keeps rank and consistency intact.
        scale = pivval[:, None, None]
        scale = np.where(below[:, :, None], scale, one)
        batch *= scale
        batch -= factor[:, :, None] * pivrow[:, None, :]
        batch %= p
        r[idx] = rr + 1
    return r


def batch_rank(batch: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of matrices (the stack is destroyed)."""
    return _batch_forward_eliminate(batch, p, batch.shape[2])


def batch_feasible(aug: np.ndarray, p: int, nvars: int) -> np.ndarray:
    """Consistency flags for a stack of augmented systems ``[A | b]``.

    ``aug`` has shape (B, rows, nvars+1) and is destroyed.
    """
    r = _batch_forward_eliminate(aug, p, nvars)
    rowidx = np.arange(aug.shape[1])
    residual = (aug[:, :, nvars] != 0) & (rowidx[None, :] >= r[:, None])
    return ~residual.any(axis=1)


def all_square_submatrices_nonsingular(A: FieldMatrix, size: int) -> bool:
    """Exhaustively check every ``size``-row selection of ``A`` (all columns
    taken when ``A.cols == size``) for full rank.  Desk-scale helper behind
    the MDS verifier."""
    if A.cols != size:
        raise DimensionMismatch("column count must equal the requested size")
    if A.rows == size:
        return rank(A) == size
    combos = np.array(list(itertools.combinations(range(A.rows), size)))
    stack = A._a[combos].copy()
    if A._a.dtype == object:
        return all(
            rank(FieldMatrix._wrap(A.ctx, stack[i])) == size
            for i in range(stack.shape[0])
        )
    return bool((batch_rank(stack, A.ctx.p) == size).all())
