"""Constructive worst-case machinery: difference bases, full-rank row
partitioning, and the two-setup attack that defeats any linear code one
encoder short of the recovery threshold.

The attack manufactures two complete source behaviors that encode to the
same transcript on a chosen set of t*-1 encoders while differing in at least
one honest message.  Sketch: pick beta adversarial source columns and t*-1
encoder rows such that few rows ignore all chosen columns; split the rows
into groups whose restrictions to the chosen columns are full rank; assign
version indices to groups so that on every row the difference between the
two setups collapses to a single difference variable per adversary; the
resulting homogeneous system has more variables than equations and its
block structure forces a solution that shifts an honest message.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass

import numpy as np

from .codes import GeneratorMatrix, iter_converse_selections
from .errors import (
    AttackConstructionFailed,
    DimensionMismatch,
    NullspaceDeltaZero,
    PreconditionViolated,
    SelectionImpossible,
)
from .field import FieldContext, FieldMatrix, rank, solve
from .system import SourceBehavior, SystemConfig, encode_transcript

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Difference basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DifferenceBasis:
    """Spanning structure for all pairwise differences of two v-sets.

    For values a_0..a_{v-1} and b_0..b_{v-1}, every difference a_i - b_j is
    a {-1, 0, +1} combination of the 2v-1 anchor differences c_{i,i} and
    c_{i,i+1}.  ``pairs`` lists the anchors; :meth:`coefficients` returns the
    combination for an arbitrary (i, j).  Indices are 0-based.
    """

    v: int
    pairs: tuple[tuple[int, int], ...]

    def coefficients(self, i: int, j: int) -> tuple[int, ...]:
        v = self.v
        if not (0 <= i < v and 0 <= j < v):
            raise ValueError(f"indices must lie in [0, {v})")
        pos = {pair: idx for idx, pair in enumerate(self.pairs)}
        coeffs = [0] * len(self.pairs)
        if j == i:
            coeffs[pos[(i, i)]] = 1
        elif j == i + 1:
            coeffs[pos[(i, i + 1)]] = 1
        elif j > i + 1:
            # Telescope forward: chain c_{l,l+1} minus the interior c_{l,l}.
            for l in range(i, j):
                coeffs[pos[(l, l + 1)]] += 1
            for l in range(i + 1, j):
                coeffs[pos[(l, l)]] -= 1
        else:
            # Telescope backward: chain c_{l,l} minus the interior c_{l,l+1}.
            for l in range(j, i + 1):
                coeffs[pos[(l, l)]] += 1
            for l in range(j, i):
                coeffs[pos[(l, l + 1)]] -= 1
        return tuple(coeffs)

    def decomposition(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Coefficient vectors for every (i, j) pair."""
        return {
            (i, j): self.coefficients(i, j)
            for i in range(self.v)
            for j in range(self.v)
        }


def diff_basis(v: int) -> DifferenceBasis:
    if v < 1:
        raise ValueError(f"need v >= 1, got v={v}")
    pairs = tuple((i, i) for i in range(v)) + tuple((i, i + 1) for i in range(v - 1))
    return DifferenceBasis(v, pairs)


# ---------------------------------------------------------------------------
# Full-rank row partitioning
# ---------------------------------------------------------------------------


def _rows_rank(ctx: FieldContext, E: np.ndarray, idxs) -> int:
    if not idxs:
        return 0
    return rank(FieldMatrix._wrap(ctx, E[np.array(sorted(idxs))]))


def _greedy_blocks(ctx, E: np.ndarray, h: int, beta: int, m: int):
    """Extract m-1 groups of beta independent rows, always working on the
    first h+beta remaining rows; the leftover becomes group 1.  Returns
    (leftover, groups) with row indices, or None if extraction stalls."""
    remaining = list(range(E.shape[0]))
    groups: list[list[int]] = []
    for _ in range(m - 1):
        window = remaining[: min(h + beta, len(remaining))]
        picked: list[int] = []
        for i in window:
            if _rows_rank(ctx, E, picked + [i]) == len(picked) + 1:
                picked.append(i)
                if len(picked) == beta:
                    break
        if len(picked) < beta:
            return None
        groups.append(picked)
        chosen = set(picked)
        remaining = [i for i in remaining if i not in chosen]
    return remaining, groups


def _repair_leftover(ctx, E: np.ndarray, leftover, groups, beta: int):
    """Exchange rows between the leftover and earlier groups until the
    leftover block reaches rank beta.  One exchange suffices under the
    canonical preconditions; the loop covers degenerate shapes."""
    for _ in range(2 * beta):
        rk = _rows_rank(ctx, E, leftover)
        if rk == beta:
            return leftover, groups, True
        independent: list[int] = []
        for i in leftover:
            if _rows_rank(ctx, E, independent + [i]) == len(independent) + 1:
                independent.append(i)
        swapped = False
        for r_star in leftover:
            if r_star in independent or not (E[r_star] != 0).any():
                continue
            for gi, grp in enumerate(groups):
                for r_hat in grp:
                    new_grp = [r for r in grp if r != r_hat] + [r_star]
                    if _rows_rank(ctx, E, new_grp) != beta:
                        continue
                    new_left = [r for r in leftover if r != r_star] + [r_hat]
                    if _rows_rank(ctx, E, new_left) <= rk:
                        continue
                    groups = groups[:gi] + [sorted(new_grp)] + groups[gi + 1 :]
                    leftover = sorted(new_left)
                    swapped = True
                    break
                if swapped:
                    break
            if swapped:
                break
        if not swapped:
            return leftover, groups, False
    return leftover, groups, _rows_rank(ctx, E, leftover) == beta


def partition_full_rank(E: FieldMatrix, h: int, beta: int, v: int):
    """Split the rows of E into 2v-1 blocks whose restrictions are full rank.

    E must be (h + 2*beta*v - beta - 1) x beta and satisfy: (1) full column
    rank, (2) at most h-1 zero rows, (3) every (h+beta)-row submatrix has
    full column rank.  The first returned block has h+beta-1 rows, the rest
    beta rows each, and every block spans all beta columns.

    Raises:
        DimensionMismatch: E has the wrong shape.
        PreconditionViolated: one of the three properties fails (the
            exception records which).
    """
    t_expect = h + 2 * beta * v - beta - 1
    if E.rows != t_expect or E.cols != beta:
        raise DimensionMismatch(
            f"expected {t_expect}x{beta}, got {E.rows}x{E.cols}"
        )
    ctx = E.ctx
    a = E._a
    if rank(E) != beta:
        raise PreconditionViolated(1, "matrix is not full column rank")
    zero_rows = sum(1 for i in range(E.rows) if not (a[i] != 0).any())
    if zero_rows > h - 1:
        raise PreconditionViolated(2, f"{zero_rows} zero rows exceed h-1={h - 1}")
    if h + beta <= E.rows:
        for combo in itertools.combinations(range(E.rows), h + beta):
            if _rows_rank(ctx, a, list(combo)) != beta:
                raise PreconditionViolated(
                    3, f"rows {combo} restricted to the columns are rank deficient"
                )

    m = 2 * v - 1
    res = _greedy_blocks(ctx, a, h, beta, m)
    if res is None:
        raise RuntimeError("greedy extraction stalled despite valid preconditions")
    leftover, groups = res
    leftover, groups, ok = _repair_leftover(ctx, a, leftover, groups, beta)
    if not ok:
        raise RuntimeError("row exchange failed despite valid preconditions")
    blocks = [tuple(leftover)] + [tuple(g) for g in groups]
    for blk in blocks:
        if _rows_rank(ctx, a, list(blk)) != beta:
            raise RuntimeError("partition produced a rank-deficient block")
    return tuple(blocks)


# ---------------------------------------------------------------------------
# The two-setup attack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConverseConfiguration:
    """How adversarial versions map onto encoder groups.

    Group g (1-based) receives x-version ceil((g+1)/2) in setup 1 and
    z-version ceil(g/2) in setup 2, so the setup difference on group g is a
    single variable per adversary.  ``groups`` holds encoder ids; the first
    group is the large leftover block.
    """

    groups: tuple[tuple[int, ...], ...]
    x_versions: tuple[int, ...]
    z_versions: tuple[int, ...]

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)


@dataclass(frozen=True)
class AttackInstance:
    """Converse witness: two behaviors, one transcript, a shifted honest message."""

    node_set: tuple[int, ...]
    setup1: SourceBehavior
    setup2: SourceBehavior
    delta: tuple[tuple[int, int], ...]  # (honest source, shift), ascending
    w_values: tuple[tuple[int, ...], ...]  # per group, one value per adversary
    configuration: ConverseConfiguration

    def __post_init__(self):
        if all(d == 0 for _, d in self.delta):
            raise AttackConstructionFailed("every honest shift is zero")

    @property
    def adversaries(self) -> tuple[int, ...]:
        return tuple(sorted(self.setup1.adversary_set))

    def to_json(self) -> dict:
        return {
            "T": list(self.node_set),
            "setup1": self.setup1.to_json(),
            "setup2": self.setup2.to_json(),
            "delta": {
                "sources": [k for k, _ in self.delta],
                "values": [d for _, d in self.delta],
            },
            "w": [list(row) for row in self.w_values],
        }

    @classmethod
    def from_json(cls, cfg: SystemConfig, doc: dict) -> "AttackInstance":
        setup1 = SourceBehavior.from_json(cfg, doc["setup1"])
        setup2 = SourceBehavior.from_json(cfg, doc["setup2"])
        delta = tuple(
            zip(doc["delta"]["sources"], (int(x) for x in doc["delta"]["values"]))
        )
        w = tuple(tuple(int(x) for x in row) for row in doc["w"])
        groups = (tuple(doc["T"]),)  # replay does not restore the grouping
        conf = ConverseConfiguration(groups, (1,), (1,))
        return cls(tuple(doc["T"]), setup1, setup2, delta, w, conf)


def converse_attack(gm: GeneratorMatrix, cfg: SystemConfig, seed: int) -> AttackInstance:
    """Construct a two-setup attack on t*-1 encoders.

    The group count adapts to the evaluation size: with t = t*-1 rows the
    construction uses m = ceil((t-h+1)/beta) groups (always at most 2v-1),
    which reproduces the canonical layout when N is above the threshold and
    shrinks gracefully when t* = N.

    Raises:
        SelectionImpossible: no admissible row/column selection exists.
        NullspaceDeltaZero: every candidate selection yielded a nullspace
            that keeps honest messages fixed (non-generic code).
    """
    if gm.N != cfg.N or gm.K != cfg.K or gm.ctx.p != cfg.p:
        raise ValueError("generator and system config disagree")
    ctx = gm.ctx
    p = ctx.p
    K, beta, v, h = cfg.K, cfg.beta, cfg.v, cfg.h
    t = cfg.t_star - 1
    m = max(1, -(-(t - h + 1) // beta))  # ceil((t-h+1)/beta)
    if m > 2 * v - 1:
        raise AttackConstructionFailed("group count exceeds the version budget")

    saw_candidate = False
    for T, A in iter_converse_selections(gm, beta, v):
        saw_candidate = True
        E = gm.matrix._a[np.array(T)][:, np.array(A)]
        res = _greedy_blocks(ctx, E, h, beta, m)
        if res is None:
            continue
        leftover, groups = res
        leftover, groups, ok = _repair_leftover(ctx, E, leftover, groups, beta)
        if not ok:
            continue
        blocks = [list(leftover)] + [list(g) for g in groups]

        Hs = [k for k in range(K) if k not in A]
        B = np.zeros((t, m * beta + h), dtype=ctx.dtype)
        for g, blk in enumerate(blocks):
            for i in blk:
                B[i, g * beta : (g + 1) * beta] = E[i]
        B[:, m * beta :] = gm.matrix._a[np.array(T)][:, Hs]
        out = solve(FieldMatrix._wrap(ctx, B), [0] * t)
        vec = next(
            (bv for bv in out.nullspace_basis if any(bv[m * beta :])), None
        )
        if vec is None:
            log.warning("selection T=%s A=%s left honest messages fixed", T, A)
            continue

        return _instantiate(gm, cfg, seed, T, A, Hs, blocks, m, vec)

    if not saw_candidate:
        raise SelectionImpossible(
            f"no admissible row/column selection for beta={beta}, v={v}"
        )
    raise NullspaceDeltaZero(
        "no selection produced a nullspace vector shifting an honest message"
    )


def _instantiate(gm, cfg, seed, T, A, Hs, blocks, m, vec) -> AttackInstance:
    p = cfg.p
    beta = cfg.beta
    rng = random.Random(seed)

    w = [[int(vec[g * beta + a]) for a in range(beta)] for g in range(m)]
    delta = {k: int(vec[m * beta + j]) for j, k in enumerate(Hs)}

    # Base draws in source order: honest message, or first version.
    base = [rng.randrange(p) for _ in range(cfg.K)]

    # Version chains: z_i = x_i + w_{2i-1}; x_{i+1} = z_i - w_{2i} (1-based).
    xs: dict[int, list[int]] = {}
    zs: dict[int, list[int]] = {}
    for j, k in enumerate(A):
        xk = [base[k]]
        zk: list[int] = []
        for g in range(1, m + 1):
            if g % 2 == 1:
                zk.append((xk[(g + 1) // 2 - 1] + w[g - 1][j]) % p)
            else:
                xk.append((zk[g // 2 - 1] - w[g - 1][j]) % p)
        xs[k] = xk
        zs[k] = zk
        if len(set(xk)) < len(xk) or len(set(zk)) < len(zk):
            log.debug("version collision for source %d (still a valid attack)", k)

    x_ver = tuple((g + 2) // 2 for g in range(1, m + 1))
    z_ver = tuple((g + 1) // 2 for g in range(1, m + 1))
    group_of = {}
    for g, blk in enumerate(blocks):
        for i in blk:
            group_of[T[i]] = g

    rows1 = []
    rows2 = []
    for k in range(cfg.K):
        if k in delta:
            rows1.append((base[k],) * cfg.N)
            rows2.append(((base[k] + delta[k]) % p,) * cfg.N)
        else:
            r1 = [xs[k][0]] * cfg.N
            r2 = [zs[k][0]] * cfg.N
            for n in T:
                g = group_of[n]
                r1[n] = xs[k][x_ver[g] - 1]
                r2[n] = zs[k][z_ver[g] - 1]
            rows1.append(tuple(r1))
            rows2.append(tuple(r2))

    adv = frozenset(A)
    setup1 = SourceBehavior(cfg, tuple(rows1), adv)
    setup2 = SourceBehavior(cfg, tuple(rows2), adv)

    t1 = encode_transcript(gm, setup1, T)
    t2 = encode_transcript(gm, setup2, T)
    if t1.values != t2.values:
        raise AttackConstructionFailed("setups do not encode to the same transcript")

    conf = ConverseConfiguration(
        tuple(tuple(T[i] for i in blk) for blk in blocks), x_ver, z_ver
    )
    return AttackInstance(
        node_set=tuple(T),
        setup1=setup1,
        setup2=setup2,
        delta=tuple(sorted(delta.items())),
        w_values=tuple(tuple(row) for row in w),
        configuration=conf,
    )


def verify_attack(
    gm: GeneratorMatrix, attack: AttackInstance, cfg: SystemConfig | None = None
) -> bool:
    """Independent re-check of an attack instance.

    Re-encodes both setups on the attacked encoder set, requires identical
    transcripts, a nonzero honest shift, and model-valid behaviors (at most
    v distinct values per adversarial source).  ``cfg`` overrides the model
    the setups are validated against; it defaults to the one they carry.
    """
    try:
        cfg = cfg if cfg is not None else attack.setup1.cfg
        s1 = SourceBehavior(cfg, attack.setup1.rows, attack.setup1.adversary_set)
        s2 = SourceBehavior(cfg, attack.setup2.rows, attack.setup2.adversary_set)
        t1 = encode_transcript(gm, s1, attack.node_set)
        t2 = encode_transcript(gm, s2, attack.node_set)
    except Exception:
        return False
    if t1.values != t2.values:
        return False
    return any(d != 0 for _, d in attack.delta)
