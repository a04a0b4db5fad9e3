"""The (N, K, beta, v) distributed encoding system model.

K source nodes each send one symbol to every one of N encoding nodes.  An
honest source sends the same symbol everywhere; an adversarial source may
send up to v distinct values, choosing freely which encoder sees which.
Encoder n stores the linear combination of what it received, row n of the
generator matrix providing the coefficients.

:class:`SourceBehavior` records the full K x N grid of sent symbols together
with the adversary set, so it doubles as ground truth for verification.  The
decoder never reads it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .codes import GeneratorMatrix, threshold
from .errors import NodeOutOfRange, TooManyAdversaries
from .field import DEFAULT_PRIME, is_prime


@dataclass(frozen=True)
class SystemConfig:
    """Model parameters.  ``h`` is the honest-node count, ``t_star`` the
    recovery threshold min(N, K + 2*beta*(v-1))."""

    N: int
    K: int
    beta: int
    v: int
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not 1 <= self.beta < self.K <= self.N:
            raise ValueError(
                f"need 1 <= beta < K <= N, got beta={self.beta}, K={self.K}, N={self.N}"
            )
        if self.v < 1:
            raise ValueError(f"need v >= 1, got v={self.v}")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")

    @property
    def h(self) -> int:
        return self.K - self.beta

    @property
    def t_star(self) -> int:
        return threshold(self.N, self.K, self.beta, self.v)


@dataclass(frozen=True)
class SourceBehavior:
    """What every source sent to every encoder.

    ``rows[k][n]`` is the symbol source k sent to encoder n.  Rows of sources
    outside ``adversary_set`` must be constant; adversarial rows may carry at
    most ``cfg.v`` distinct values.
    """

    cfg: SystemConfig
    rows: tuple[tuple[int, ...], ...]
    adversary_set: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "adversary_set", frozenset(self.adversary_set))
        object.__setattr__(
            self, "rows", tuple(tuple(int(x) % self.cfg.p for x in r) for r in self.rows)
        )
        self.validate()

    def validate(self) -> None:
        cfg = self.cfg
        if len(self.adversary_set) > cfg.beta:
            raise TooManyAdversaries(
                f"{len(self.adversary_set)} adversaries exceed beta={cfg.beta}"
            )
        if any(not 0 <= k < cfg.K for k in self.adversary_set):
            raise ValueError("adversary indices must lie in [0, K)")
        if len(self.rows) != cfg.K:
            raise ValueError(f"need {cfg.K} source rows, got {len(self.rows)}")
        for k, row in enumerate(self.rows):
            if len(row) != cfg.N:
                raise ValueError(f"source {k} row has length {len(row)}, need {cfg.N}")
            distinct = len(set(row))
            if k in self.adversary_set:
                if distinct > cfg.v:
                    raise ValueError(
                        f"adversarial source {k} uses {distinct} values, cap is {cfg.v}"
                    )
            elif distinct != 1:
                raise ValueError(f"honest source {k} must send one constant value")

    @property
    def honest_sources(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.cfg.K) if k not in self.adversary_set)

    def honest_message(self, k: int) -> int:
        if k in self.adversary_set:
            raise ValueError(f"source {k} is adversarial")
        return self.rows[k][0]

    def to_json(self) -> dict:
        return {
            "adversary_set": sorted(self.adversary_set),
            "rows": [list(r) for r in self.rows],
        }

    @classmethod
    def from_json(cls, cfg: SystemConfig, doc: dict) -> "SourceBehavior":
        return cls(
            cfg,
            tuple(tuple(r) for r in doc["rows"]),
            frozenset(doc["adversary_set"]),
        )


@dataclass(frozen=True)
class Transcript:
    """Coded symbols observed on an ordered encoder subset."""

    node_set: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.node_set) != len(self.values):
            raise ValueError("one value per node required")
        if len(set(self.node_set)) != len(self.node_set):
            raise ValueError("node indices must be distinct")

    def to_json(self) -> dict:
        return {"node_set": list(self.node_set), "values": list(self.values)}

    @classmethod
    def from_json(cls, doc: dict) -> "Transcript":
        return cls(tuple(doc["node_set"]), tuple(doc["values"]))


def behavior_honest(cfg: SystemConfig, messages) -> SourceBehavior:
    """All sources honest: source k sends ``messages[k]`` everywhere."""
    if len(messages) != cfg.K:
        raise ValueError(f"need {cfg.K} messages, got {len(messages)}")
    rows = tuple((int(m) % cfg.p,) * cfg.N for m in messages)
    return SourceBehavior(cfg, rows, frozenset())


def behavior_random_adversarial(
    cfg: SystemConfig, honest_messages, adversary_set, seed: int
) -> SourceBehavior:
    """Random baseline adversary.

    Each adversarial source draws v candidate values uniformly (collisions
    allowed, so it may effectively use fewer) and assigns a uniformly random
    candidate to every encoder slot.  Honest rows are constant.  Deterministic
    given ``seed``.
    """
    adversary_set = frozenset(adversary_set)
    if len(adversary_set) > cfg.beta:
        raise TooManyAdversaries(
            f"{len(adversary_set)} adversaries exceed beta={cfg.beta}"
        )
    if len(honest_messages) != cfg.K:
        raise ValueError(f"need {cfg.K} messages, got {len(honest_messages)}")
    rng = random.Random(seed)
    rows = []
    for k in range(cfg.K):
        if k in adversary_set:
            values = [rng.randrange(cfg.p) for _ in range(cfg.v)]
            rows.append(tuple(values[rng.randrange(cfg.v)] for _ in range(cfg.N)))
        else:
            rows.append((int(honest_messages[k]) % cfg.p,) * cfg.N)
    return SourceBehavior(cfg, tuple(rows), adversary_set)


def encode_transcript(gm: GeneratorMatrix, behavior: SourceBehavior, nodes) -> Transcript:
    """Encode: value at node n is sum_k G[n,k] * rows[k][n] over GF(p).

    Raises:
        NodeOutOfRange: a node index is repeated or outside [0, N).
    """
    nodes = tuple(int(n) for n in nodes)
    if len(set(nodes)) != len(nodes) or any(not 0 <= n < gm.N for n in nodes):
        raise NodeOutOfRange(f"bad node subset {nodes} for N={gm.N}")
    if gm.N != behavior.cfg.N or gm.K != behavior.cfg.K or gm.ctx.p != behavior.cfg.p:
        raise ValueError("generator and behavior disagree on system shape")
    behavior.validate()
    p = gm.ctx.p
    values = []
    for n in nodes:
        g = gm.matrix.row(n)
        s = 0
        for k in range(gm.K):
            s = (s + g[k] * behavior.rows[k][n]) % p
        values.append(s)
    return Transcript(nodes, tuple(values))
