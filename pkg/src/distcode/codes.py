"""Generator matrix construction and structural analysis.

Three code families are supported: fully random linear coefficients,
systematic (identity rows followed by random rows), and Vandermonde rows
built from distinct evaluation points.  :func:`is_mds` verifies the MDS
property exhaustively (every K x K row submatrix nonsingular), which at desk
scale is cheap and gives certainty instead of a probabilistic claim.

:func:`select_converse_rows_and_columns` picks the encoder rows and source
columns the worst-case attack operates on: t*-1 rows containing at most K-1
single-support rows, and beta columns such that at most h-1 of the chosen
rows vanish on all of them.  Any correct MDS code admits such a choice.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass

import numpy as np

from .errors import BadDimensions, DuplicatePoints, SelectionImpossible
from .field import (
    FieldContext,
    FieldMatrix,
    all_square_submatrices_nonsingular,
)

log = logging.getLogger(__name__)

KINDS = ("random", "systematic", "reed_solomon")


@dataclass(frozen=True)
class GeneratorMatrix:
    """An N x K linear code: row n holds the coefficients of encoder n.

    Invariants checked at construction: no all-zero row; systematic codes
    start with the K x K identity; Vandermonde codes match their evaluation
    points exactly.
    """

    matrix: FieldMatrix
    kind: str
    rs_points: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown code kind {self.kind!r}")
        m = self.matrix
        if m.rows < m.cols or m.cols < 1:
            raise BadDimensions(f"need N >= K >= 1, got N={m.rows}, K={m.cols}")
        for n in range(m.rows):
            if all(x == 0 for x in m.row(n)):
                raise ValueError(f"encoder row {n} is identically zero")
        if self.kind == "systematic":
            for n in range(m.cols):
                expect = tuple(1 if j == n else 0 for j in range(m.cols))
                if m.row(n) != expect:
                    raise ValueError("systematic rows must form the identity pattern")
        if self.kind == "reed_solomon":
            pts = self.rs_points
            if pts is None or len(pts) != m.rows:
                raise ValueError("reed_solomon codes need one point per row")
            if len(set(pts)) != len(pts):
                raise DuplicatePoints("evaluation points must be distinct")
            p = m.ctx.p
            for n, lam in enumerate(pts):
                if m.row(n) != tuple(pow(lam, k, p) for k in range(m.cols)):
                    raise ValueError("rows do not match the evaluation points")
        elif self.rs_points is not None:
            raise ValueError("rs_points only apply to reed_solomon codes")

    @property
    def N(self) -> int:
        return self.matrix.rows

    @property
    def K(self) -> int:
        return self.matrix.cols

    @property
    def ctx(self) -> FieldContext:
        return self.matrix.ctx

    def to_json(self) -> dict:
        doc = {
            "p": self.ctx.p,
            "N": self.N,
            "K": self.K,
            "kind": self.kind,
            "rows": self.matrix.to_rows(),
        }
        if self.rs_points is not None:
            doc["rs_points"] = list(self.rs_points)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "GeneratorMatrix":
        ctx = FieldContext(int(doc["p"]))
        m = FieldMatrix(ctx, doc["rows"])
        if m.rows != int(doc["N"]) or m.cols != int(doc["K"]):
            raise BadDimensions("declared N/K disagree with the row grid")
        pts = doc.get("rs_points")
        return cls(m, doc["kind"], tuple(int(x) for x in pts) if pts else None)


def save_code(gm: GeneratorMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gm.to_json(), fh, sort_keys=True)


def load_code(path) -> GeneratorMatrix:
    with open(path, encoding="utf-8") as fh:
        return GeneratorMatrix.from_json(json.load(fh))


def _random_rows(ctx: FieldContext, rng: random.Random, count: int, K: int):
    rows = []
    for _ in range(count):
        row = [rng.randrange(ctx.p) for _ in range(K)]
        while all(x == 0 for x in row):  # zero encoder stores nothing; redraw
            row = [rng.randrange(ctx.p) for _ in range(K)]
        rows.append(row)
    return rows


def gen_random_linear(ctx: FieldContext, N: int, K: int, seed: int) -> GeneratorMatrix:
    """All N*K coefficients drawn independently and uniformly from GF(p).

    Deterministic given ``seed``.  Raises :class:`BadDimensions` unless
    ``N >= K >= 1``.
    """
    if not 1 <= K <= N:
        raise BadDimensions(f"need N >= K >= 1, got N={N}, K={K}")
    rng = random.Random(seed)
    return GeneratorMatrix(FieldMatrix(ctx, _random_rows(ctx, rng, N, K)), "random")


def gen_systematic(ctx: FieldContext, N: int, K: int, seed: int) -> GeneratorMatrix:
    """First K encoders store one source symbol each; the rest are random."""
    if not 1 <= K <= N:
        raise BadDimensions(f"need N >= K >= 1, got N={N}, K={K}")
    rng = random.Random(seed)
    rows = [[1 if j == n else 0 for j in range(K)] for n in range(K)]
    rows += _random_rows(ctx, rng, N - K, K)
    return GeneratorMatrix(FieldMatrix(ctx, rows), "systematic")


def gen_reed_solomon(
    ctx: FieldContext,
    N: int,
    K: int,
    points=None,
    seed: int | None = None,
) -> GeneratorMatrix:
    """Vandermonde generator: row n is (1, l_n, l_n^2, ..., l_n^{K-1}).

    Args:
        points: N distinct field elements; when omitted, N distinct values
            are sampled uniformly without replacement (seeded).

    Raises:
        DuplicatePoints: supplied points collide.
        BadDimensions: ``N >= K >= 1`` fails or N exceeds the field size.
    """
    if not 1 <= K <= N:
        raise BadDimensions(f"need N >= K >= 1, got N={N}, K={K}")
    if N > ctx.p:
        raise BadDimensions(f"cannot pick {N} distinct points in GF({ctx.p})")
    if points is None:
        rng = random.Random(seed)
        points = rng.sample(range(ctx.p), N)
    points = tuple(int(x) % ctx.p for x in points)
    if len(set(points)) != len(points):
        raise DuplicatePoints(f"points {points} are not distinct")
    rows = [[pow(lam, k, ctx.p) for k in range(K)] for lam in points]
    return GeneratorMatrix(FieldMatrix(ctx, rows), "reed_solomon", points)


def is_mds(gm: GeneratorMatrix) -> bool:
    """True iff every K x K row submatrix of the generator is nonsingular.

    Exhaustive over all C(N, K) row subsets; intended for desk-scale N.
    """
    return all_square_submatrices_nonsingular(gm.matrix, gm.K)


def draw_mds(
    ctx: FieldContext,
    kind: str,
    N: int,
    K: int,
    seed: int,
    points=None,
    retries: int = 16,
) -> GeneratorMatrix:
    """Generate a code of the requested kind and re-draw (seed+1, seed+2, ...)
    until it passes :func:`is_mds`.  Failure odds per draw are about
    C(N,K)*K/p, so the retry cap is never expected to bind."""
    for attempt in range(retries):
        s = seed + attempt
        if kind == "random":
            gm = gen_random_linear(ctx, N, K, s)
        elif kind == "systematic":
            gm = gen_systematic(ctx, N, K, s)
        elif kind == "reed_solomon":
            gm = gen_reed_solomon(ctx, N, K, points=points, seed=s)
        else:
            raise ValueError(f"unknown code kind {kind!r}")
        if is_mds(gm):
            if attempt:
                log.warning("MDS draw needed %d retries (kind=%s)", attempt, kind)
            return gm
        log.warning("seed %d produced a non-MDS %s code, redrawing", s, kind)
    raise RuntimeError(f"no MDS {kind} code found in {retries} draws")


@dataclass(frozen=True)
class SupportProfile:
    """Support structure of a generator: which rows touch which sources.

    ``univariate_rows`` lists encoders that read exactly one source;
    ``zero_pattern[k]`` lists the encoders that ignore source k.
    """

    univariate_rows: frozenset[int]
    zero_pattern: tuple[frozenset[int], ...]


def support_profile(gm: GeneratorMatrix) -> SupportProfile:
    a = gm.matrix._a
    nz = a != 0
    univariate = frozenset(int(n) for n in np.nonzero(nz.sum(axis=1) == 1)[0])
    zero_pattern = tuple(
        frozenset(int(n) for n in np.nonzero(~nz[:, k])[0]) for k in range(gm.K)
    )
    return SupportProfile(univariate, zero_pattern)


def threshold(N: int, K: int, beta: int, v: int) -> int:
    """Minimum number of encoders that guarantees unique recovery of honest
    inputs under linear encoding: min(N, K + 2*beta*(v-1))."""
    return min(N, K + 2 * beta * (v - 1))


def iter_converse_selections(gm: GeneratorMatrix, beta: int, v: int):
    """Yield candidate (row_set, col_set) pairs for the attack, best first.

    Each candidate consists of t*-1 encoder rows with at most K-1 univariate
    rows, plus beta source columns on which at most h-1 of the chosen rows
    are entirely zero.  One candidate is produced per admissible column set,
    in lexicographic column order.
    """
    N, K = gm.N, gm.K
    if not 1 <= beta < K:
        raise BadDimensions(f"need 1 <= beta < K, got beta={beta}, K={K}")
    h = K - beta
    t = threshold(N, K, beta, v) - 1
    prof = support_profile(gm)
    univ = prof.univariate_rows
    for cols in itertools.combinations(range(K), beta):
        zero_rows = frozenset.intersection(*(prof.zero_pattern[c] for c in cols))
        pools = ([], [], [], [])  # ordered by scarcity pressure
        for n in range(N):
            z = n in zero_rows
            u = n in univ
            pools[2 * z + u].append(n)
        chosen: list[int] = []
        zeros_used = univ_used = 0
        for pool in pools:
            for n in pool:
                if len(chosen) == t:
                    break
                if (n in zero_rows) and zeros_used >= h - 1:
                    continue
                if (n in univ) and univ_used >= K - 1:
                    continue
                chosen.append(n)
                zeros_used += n in zero_rows
                univ_used += n in univ
        if len(chosen) != t:
            continue
        row_set = tuple(sorted(chosen))
        # Re-count on the final sets; the caps above must have held.
        if sum(1 for n in row_set if n in zero_rows) > h - 1:
            continue
        if sum(1 for n in row_set if n in univ) > K - 1:
            continue
        yield row_set, cols


def select_converse_rows_and_columns(
    gm: GeneratorMatrix, beta: int, v: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """First admissible (row_set, col_set) pair for the worst-case attack.

    Raises:
        SelectionImpossible: no column set admits enough usable rows; such a
            support structure cannot come from a correct MDS code.
    """
    for row_set, cols in iter_converse_selections(gm, beta, v):
        return row_set, cols
    raise SelectionImpossible(
        f"no admissible row/column selection for beta={beta}, v={v}"
    )
