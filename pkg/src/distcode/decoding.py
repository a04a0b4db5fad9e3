"""Exhaustive feasibility decoding.

The decoder knows neither which sources are adversarial nor how an
equivocating source distributed its values.  It therefore sweeps every
*presumed scenario*: a choice of beta presumed-adversarial sources together
with, for each of them, a partition of the observed encoder set into at most
v groups (encoders presumed to have received the same value).  Each scenario
induces a linear system; feasible scenarios contribute their presumed-honest
solution values.

Two details depart from the naive sweep without changing its outcome:

* Partitions are enumerated unlabeled (restricted-growth strings with at
  most v blocks) rather than as labeled v-tuples of possibly-empty groups.
  Relabeling and empty groups only permute or add free variables, so the
  feasible solution sets projected to presumed-honest coordinates coincide.
* A presumed-honest value is recorded only when it is *pinned*, i.e. equal
  across every solution of the scenario's system.  Underdetermined feasible
  scenarios never contribute guesses.

Fast mode keeps the first pinned value per coordinate.  Strict mode retains
every feasible scenario and reports an ambiguity witness whenever two
feasible solutions disagree on a coordinate both presume honest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .codes import GeneratorMatrix
from .errors import BudgetExceeded, NodeOutOfRange, TranscriptMismatch
from .field import FieldMatrix, batch_feasible, solve
from .system import SourceBehavior, SystemConfig, Transcript

DEFAULT_BUDGET = 10**8

_CHUNK = 1 << 14


def enumerate_partitions(items, v: int):
    """Yield every partition of ``items`` into at most ``v`` unlabeled blocks.

    Partitions appear exactly once, in restricted-growth-string order; blocks
    are ordered by first occurrence and keep the input ordering internally.
    The total count is sum_{j=1..v} S(n, j) (Stirling numbers, second kind).
    """
    items = tuple(items)
    n = len(items)
    if n < 1:
        raise ValueError("cannot partition an empty set")
    if v < 1:
        raise ValueError(f"need v >= 1, got v={v}")
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            blocks = [[] for _ in range(used)]
            for pos, lbl in enumerate(labels):
                blocks[lbl].append(items[pos])
            yield tuple(tuple(b) for b in blocks)
            return
        for lbl in range(min(used + 1, v)):
            labels[i] = lbl
            yield from rec(i + 1, max(used, lbl + 1))

    yield from rec(0, 0)


def partition_count(n: int, v: int) -> int:
    """Number of partitions of an n-set into at most v blocks."""
    if n < 0 or v < 1:
        raise ValueError("need n >= 0 and v >= 1")
    # S(n, j) by the standard recurrence, summed over j <= v.
    prev = [1] + [0] * v  # S(0, 0) = 1
    for _ in range(n):
        cur = [0] * (v + 1)
        for j in range(1, v + 1):
            cur[j] = j * prev[j] + prev[j - 1]
        prev = cur
    return sum(prev[1:])


@dataclass(frozen=True)
class PresumedScenario:
    """A decoder hypothesis: presumed adversaries plus one partition of the
    observed encoder set per presumed adversary."""

    adversaries: tuple[int, ...]
    partitions: tuple[tuple[tuple[int, ...], ...], ...]


@dataclass
class ScenarioSolution:
    """One concrete solution of a feasible scenario.

    ``honest_values`` holds the particular solution for every presumed-honest
    source; coordinates in ``unpinned`` vary across the scenario's solution
    set and must not be trusted.  ``block_values`` gives the value assigned
    to each partition block of each presumed adversary.
    """

    scenario: PresumedScenario
    honest_values: dict[int, int]
    block_values: dict[int, tuple[int, ...]]
    unpinned: frozenset[int]

    def to_behavior(self, cfg: SystemConfig) -> SourceBehavior:
        """Materialize the full source grid this solution describes.

        Encoders outside the observed set receive each adversary's first
        block value, which keeps the per-source distinct count unchanged.
        """
        rows = []
        for k in range(cfg.K):
            if k in self.honest_values:
                rows.append((self.honest_values[k],) * cfg.N)
            else:
                j = self.scenario.adversaries.index(k)
                vals = self.block_values[k]
                row = [vals[0]] * cfg.N
                for b, block in enumerate(self.scenario.partitions[j]):
                    for n in block:
                        row[n] = vals[b]
                rows.append(tuple(row))
        return SourceBehavior(cfg, tuple(rows), frozenset(self.scenario.adversaries))

    def to_json(self) -> dict:
        return {
            "presumed_adversaries": list(self.scenario.adversaries),
            "partitions": [[list(b) for b in part] for part in self.scenario.partitions],
            "honest": {str(k): val for k, val in sorted(self.honest_values.items())},
            "blocks": {str(k): list(v) for k, v in sorted(self.block_values.items())},
            "unpinned": sorted(self.unpinned),
        }


@dataclass
class DecodeResult:
    """Decoder output.

    ``estimates[k]`` is ``None`` while no feasible scenario pinned source k.
    Strict mode additionally carries every feasible solution, the set of
    coordinates on which feasible solutions disagree, and one witness pair
    per such coordinate (``ambiguity`` is the witness for the smallest one).
    """

    estimates: tuple[int | None, ...]
    feasible_count: int
    ambiguity: tuple[ScenarioSolution, ScenarioSolution] | None = None
    ambiguous_coordinates: frozenset[int] = frozenset()
    witnesses: dict[int, tuple[ScenarioSolution, ScenarioSolution]] = field(
        default_factory=dict
    )
    feasible: tuple[ScenarioSolution, ...] = ()
    scenarios_examined: int = 0
    mode: str = "fast"

    def to_json(self) -> dict:
        doc: dict = {
            "estimates": [v if v is None else int(v) for v in self.estimates],
            "feasible_count": self.feasible_count,
        }
        if self.ambiguity is not None:
            doc["ambiguity"] = [s.to_json() for s in self.ambiguity]
        return doc


def _scenario_system(ctx, Gsub, pos_of, Hs, A_hat, parts):
    """Assemble the scenario's coefficient matrix.

    Variable order: presumed-honest sources ascending, then each presumed
    adversary's blocks in partition order.  Returns (matrix, spans) where
    ``spans[j]`` is the column range of adversary ``A_hat[j]``.
    """
    p = ctx.p
    t = Gsub.shape[0]
    cols = [Gsub[:, k] for k in Hs]
    spans = []
    for j, k in enumerate(A_hat):
        gcol = Gsub[:, k]
        start = len(cols)
        for block in parts[j]:
            ind = np.zeros(t, dtype=Gsub.dtype)
            for n in block:
                ind[pos_of[n]] = 1
            cols.append(gcol * ind % p)
        spans.append((start, len(cols)))
    return FieldMatrix._wrap(ctx, np.stack(cols, axis=1)), spans


def _vector_to_solution(scenario, Hs, spans, vec, unpinned) -> ScenarioSolution:
    honest = {k: int(vec[i]) for i, k in enumerate(Hs)}
    blocks = {
        k: tuple(int(vec[c]) for c in range(spans[j][0], spans[j][1]))
        for j, k in enumerate(scenario.adversaries)
    }
    return ScenarioSolution(scenario, honest, blocks, unpinned)


def decode(
    gm: GeneratorMatrix,
    nodes,
    transcript: Transcript,
    cfg: SystemConfig,
    mode: str = "fast",
    budget: int = DEFAULT_BUDGET,
) -> DecodeResult:
    """Run the exhaustive feasibility sweep over the transcript.

    Args:
        gm: generator matrix of the code actually used.
        nodes: the observed encoder subset, matching ``transcript.node_set``.
        cfg: system parameters (supplies beta and v).
        mode: ``"fast"`` records first pinned values; ``"strict"`` also
            collects all feasible solutions and ambiguity witnesses.
        budget: cap on C(K, beta) * (number of partitions)^beta scenario
            solves; exceeding it raises :class:`BudgetExceeded`.

    Raises:
        TranscriptMismatch: ``nodes`` disagrees with the transcript.
        NodeOutOfRange: node indices repeat or exceed N.
        BudgetExceeded: the sweep would be too large.
    """
    if mode not in ("fast", "strict"):
        raise ValueError(f"unknown mode {mode!r}")
    nodes = tuple(int(n) for n in nodes)
    if nodes != tuple(transcript.node_set):
        raise TranscriptMismatch("decode node set differs from transcript node set")
    if len(transcript.values) != len(nodes):
        raise TranscriptMismatch("transcript value count differs from node count")
    if len(set(nodes)) != len(nodes) or any(not 0 <= n < gm.N for n in nodes):
        raise NodeOutOfRange(f"bad node subset {nodes} for N={gm.N}")
    if gm.N != cfg.N or gm.K != cfg.K or gm.ctx.p != cfg.p:
        raise ValueError("generator and system config disagree")

    ctx = gm.ctx
    p = ctx.p
    t = len(nodes)
    K, beta, v = cfg.K, cfg.beta, cfg.v
    strict = mode == "strict"

    parts = list(enumerate_partitions(nodes, v))
    n_parts = len(parts)
    n_combos = n_parts**beta
    total = math.comb(K, beta) * n_combos
    if total > budget:
        raise BudgetExceeded(
            f"{total} scenario solves exceed the budget of {budget}"
        )

    pos_of = {n: i for i, n in enumerate(nodes)}
    Gsub = gm.matrix._a[np.array(nodes)]
    yv = np.array([x % p for x in transcript.values], dtype=object).astype(ctx.dtype)

    # Block membership of every partition, padded to v columns so scenario
    # coefficient stacks have uniform width.  Padding columns are zero and
    # only add free variables, which cannot affect consistency.
    memb = np.zeros((n_parts, t, v), dtype=ctx.dtype)
    for q, part in enumerate(parts):
        for b, block in enumerate(part):
            for n in block:
                memb[q, pos_of[n], b] = 1

    estimates: list[int | None] = [None] * K
    feasible_count = 0
    feasible_list: list[ScenarioSolution] = []
    witnesses: dict[int, tuple[ScenarioSolution, ScenarioSolution]] = {}
    pinned_first: dict[int, tuple[int, ScenarioSolution]] = {}

    for A_hat in itertools.combinations(range(K), beta):
        Hs = [k for k in range(K) if k not in A_hat]
        h = len(Hs)
        D = Gsub[:, Hs]
        X = [(memb * Gsub[:, k][None, :, None]) % p for k in A_hat]
        ncols = h + beta * v

        for start in range(0, n_combos, _CHUNK):
            idxs = np.arange(start, min(start + _CHUNK, n_combos), dtype=np.int64)
            aug = np.empty((len(idxs), t, ncols + 1), dtype=ctx.dtype)
            aug[:, :, :h] = D[None, :, :]
            for j in range(beta):
                div = n_parts ** (beta - 1 - j)
                aug[:, :, h + j * v : h + (j + 1) * v] = X[j][(idxs // div) % n_parts]
            aug[:, :, ncols] = yv[None, :]
            flags = batch_feasible(aug, p, ncols)
            feasible_count += int(flags.sum())

            if not strict and all(estimates[k] is not None for k in Hs):
                continue  # feasibility already tallied; nothing left to record

            for local in np.nonzero(flags)[0]:
                combo = int(idxs[local])
                if not strict and all(estimates[k] is not None for k in Hs):
                    break
                sel = []
                for j in range(beta):
                    div = n_parts ** (beta - 1 - j)
                    sel.append(parts[(combo // div) % n_parts])
                scenario = PresumedScenario(A_hat, tuple(sel))
                A_mat, spans = _scenario_system(ctx, Gsub, pos_of, Hs, A_hat, sel)
                out = solve(A_mat, list(transcript.values))
                if not out.consistent:  # batched and exact paths must agree
                    raise RuntimeError("feasibility disagreement between solvers")
                unpinned = frozenset(
                    k for i, k in enumerate(Hs) if i not in out.pinned_coordinates
                )
                for i, k in enumerate(Hs):
                    if estimates[k] is None and i in out.pinned_coordinates:
                        estimates[k] = int(out.particular[i])
                if not strict:
                    continue

                sol = _vector_to_solution(scenario, Hs, spans, out.particular, unpinned)
                feasible_list.append(sol)
                for i, k in enumerate(Hs):
                    if k in unpinned:
                        if k not in witnesses:
                            bvec = next(
                                bv for bv in out.nullspace_basis if bv[i] != 0
                            )
                            alt = tuple(
                                (a + b) % p for a, b in zip(out.particular, bvec)
                            )
                            witnesses[k] = (
                                sol,
                                _vector_to_solution(scenario, Hs, spans, alt, unpinned),
                            )
                    else:
                        val = sol.honest_values[k]
                        seen = pinned_first.get(k)
                        if seen is None:
                            pinned_first[k] = (val, sol)
                        elif seen[0] != val and k not in witnesses:
                            witnesses[k] = (seen[1], sol)

    ambiguous = frozenset(witnesses)
    ambiguity = witnesses[min(ambiguous)] if ambiguous else None
    return DecodeResult(
        estimates=tuple(estimates),
        feasible_count=feasible_count,
        ambiguity=ambiguity,
        ambiguous_coordinates=ambiguous,
        witnesses=witnesses,
        feasible=tuple(feasible_list),
        scenarios_examined=total,
        mode=mode,
    )


@dataclass(frozen=True)
class TruthReport:
    """Per-coordinate comparison of decoder output against ground truth.

    Only truly-honest sources are judged: a wrong value is always a failure,
    and so is a coordinate still unassigned after the full sweep.  Estimates
    for adversarial sources carry no guarantee and are ignored.
    """

    statuses: tuple[tuple[int, str], ...]
    failures: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_against_truth(result: DecodeResult, behavior: SourceBehavior) -> TruthReport:
    statuses = []
    failures = []
    for k in behavior.honest_sources:
        truth = behavior.honest_message(k)
        est = result.estimates[k]
        if est is None:
            status = "missing"
        elif est == truth:
            status = "correct"
        else:
            status = "wrong"
        statuses.append((k, status))
        if status != "correct":
            failures.append(k)
    return TruthReport(tuple(statuses), tuple(failures))
