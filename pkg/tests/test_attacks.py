import random

import numpy as np
import pytest

from distcode import (
    AttackConstructionFailed,
    DimensionMismatch,
    FieldMatrix,
    PreconditionViolated,
    SystemConfig,
    converse_attack,
    decode,
    diff_basis,
    draw_mds,
    encode_transcript,
    field_new,
    gen_reed_solomon,
    partition_full_rank,
    rank,
    verify_against_truth,
    verify_attack,
)
from distcode.attacks import _greedy_blocks
import dataclasses

P = 2**31 - 1
CTX = field_new(P)


def instantiate_difference(basis, pair, a, b, p):
    """Evaluate the claimed combination numerically: sum of coeff * (a_i - b_j)."""
    coeffs = basis.coefficients(*pair)
    total = 0
    for coeff, (bi, bj) in zip(coeffs, basis.pairs):
        total = (total + coeff * (a[bi] - b[bj])) % p
    return total


class TestDifferenceBasis:
    def test_v1_trivial(self):
        basis = diff_basis(1)
        assert basis.pairs == ((0, 0),)
        assert basis.coefficients(0, 0) == (1,)

    def test_basis_size(self):
        for v in range(1, 7):
            assert len(diff_basis(v).pairs) == 2 * v - 1

    def test_v2_worked_identity(self):
        # The last difference equals chain minus diagonal plus cross term:
        # a_1 - b_1 = (a_1 - b_0) - (a_0 - b_0) + (a_0 - b_1), 0-based.
        rng = random.Random(0)
        for _ in range(100):
            a = [rng.randrange(P) for _ in range(2)]
            b = [rng.randrange(P) for _ in range(2)]
            lhs = (a[1] - b[1]) % P
            rhs = ((a[1] - b[0]) - (a[0] - b[0]) + (a[0] - b[1])) % P
            assert lhs == rhs

    def test_v3_backward_pair(self):
        # (i, j) = (2, 0): diagonal sum minus the off-diagonal chain.
        basis = diff_basis(3)
        coeffs = dict(zip(basis.pairs, basis.coefficients(2, 0)))
        assert coeffs == {
            (0, 0): 1,
            (1, 1): 1,
            (2, 2): 1,
            (0, 1): -1,
            (1, 2): -1,
        }
        rng = random.Random(1)
        for _ in range(100):
            a = [rng.randrange(P) for _ in range(3)]
            b = [rng.randrange(P) for _ in range(3)]
            assert instantiate_difference(basis, (2, 0), a, b, P) == (a[2] - b[0]) % P

    @pytest.mark.parametrize("v", range(1, 7))
    def test_all_pairs_all_v(self, v):
        basis = diff_basis(v)
        rng = random.Random(v)
        for i in range(v):
            for j in range(v):
                coeffs = basis.coefficients(i, j)
                assert all(c in (-1, 0, 1) for c in coeffs)
                for _ in range(20):
                    a = [rng.randrange(P) for _ in range(v)]
                    b = [rng.randrange(P) for _ in range(v)]
                    got = instantiate_difference(basis, (i, j), a, b, P)
                    assert got == (a[i] - b[j]) % P


def random_partition_input(seed, h, beta, v, planted_zeros=0):
    """Random matrix satisfying the three partition preconditions."""
    rng = random.Random(seed)
    t = h + 2 * beta * v - beta - 1
    while True:
        rows = [[rng.randrange(P) for _ in range(beta)] for _ in range(t)]
        for i in rng.sample(range(t), planted_zeros):
            rows[i] = [0] * beta
        E = FieldMatrix(CTX, rows)
        try:
            partition_full_rank(E, h, beta, v)  # also validates
        except PreconditionViolated:
            continue
        return E


class TestPartitionFullRank:
    def test_beta1_shape_and_nonzero_blocks(self):
        # h=2, beta=1, v=2: a 4x1 input with at most one zero splits into
        # blocks of sizes (2, 1, 1), each containing a nonzero entry.
        E = FieldMatrix(CTX, [[5], [0], [7], [9]])
        blocks = partition_full_rank(E, 2, 1, 2)
        assert tuple(len(b) for b in blocks) == (2, 1, 1)
        assert sorted(x for b in blocks for x in b) == [0, 1, 2, 3]
        for blk in blocks:
            assert any(E[i, 0] != 0 for i in blk)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_beta2_blocks_full_rank(self, seed):
        E = random_partition_input(seed, h=2, beta=2, v=2)
        blocks = partition_full_rank(E, 2, 2, 2)
        assert tuple(len(b) for b in blocks) == (3, 2, 2)
        for blk in blocks:
            assert rank(E.submatrix(blk, range(2))) == 2

    def test_too_many_zero_rows_rejected(self):
        rows = [[1], [0], [0], [3]]  # h = 2 allows at most one zero row
        with pytest.raises(PreconditionViolated) as err:
            partition_full_rank(FieldMatrix(CTX, rows), 2, 1, 2)
        assert err.value.property_index == 2

    def test_rank_deficient_rejected(self):
        rows = [[1, 2], [2, 4], [3, 6], [4, 8], [5, 10], [6, 12], [7, 14]]
        with pytest.raises(PreconditionViolated) as err:
            partition_full_rank(FieldMatrix(CTX, rows), 2, 2, 2)
        assert err.value.property_index in (1, 3)

    def test_wrong_shape(self):
        with pytest.raises(DimensionMismatch):
            partition_full_rank(FieldMatrix(CTX, [[1], [2]]), 2, 1, 2)

    def test_window_submatrix_precondition(self):
        # Four mutually dependent rows violate the any-(h+beta)-rows rule.
        rows = [[1, 1], [2, 2], [3, 3], [4, 4], [1, 0], [0, 1], [5, 6]]
        with pytest.raises(PreconditionViolated) as err:
            partition_full_rank(FieldMatrix(CTX, rows), 2, 2, 2)
        assert err.value.property_index == 3


def engineered_repair_input(seed, h, beta, v):
    """Input whose greedy leftover is rank deficient, forcing the exchange.

    The last h+beta-1 rows are nonzero multiples of one direction; the
    greedy pass (which always works on the first h+beta remaining rows)
    never consumes them, so they all land in the leftover block.
    """
    rng = random.Random(seed)
    t = h + 2 * beta * v - beta - 1
    tail = h + beta - 1
    while True:
        rows = [[rng.randrange(1, P) for _ in range(beta)] for _ in range(t - tail)]
        direction = [rng.randrange(1, P) for _ in range(beta)]
        for _ in range(tail):
            c = rng.randrange(1, P)
            rows.append([c * x % P for x in direction])
        E = FieldMatrix(CTX, rows)
        a = np.array(E.to_rows(), dtype=np.int64)
        res = _greedy_blocks(CTX, a, h, beta, 2 * v - 1)
        if res is None:
            continue
        leftover, _ = res
        if sorted(leftover) != list(range(t - tail, t)):
            continue  # greedy must leave exactly the parallel tail
        return E


class TestExchangeRepair:
    @pytest.mark.parametrize(
        "seed,h,beta,v",
        [(1, 2, 2, 2), (2, 2, 2, 2), (3, 2, 2, 2), (4, 3, 2, 3), (5, 3, 2, 3), (6, 3, 2, 3)],
    )
    def test_repair_path_triggers_and_succeeds(self, seed, h, beta, v):
        E = engineered_repair_input(seed, h, beta, v)
        t = E.rows
        tail = list(range(t - (h + beta - 1), t))
        # Pre-repair the leftover is the parallel tail: rank beta-1.
        assert rank(E.submatrix(tail, range(beta))) == beta - 1
        blocks = partition_full_rank(E, h, beta, v)
        assert set(blocks[0]) != set(tail)  # a row was exchanged out
        for blk in blocks:
            assert rank(E.submatrix(blk, range(beta))) == beta


class TestConverseAttack:
    def test_canonical_cell(self):
        cfg = SystemConfig(N=9, K=3, beta=1, v=2, p=P)
        gm = draw_mds(CTX, "random", 9, 3, seed=1)
        atk = converse_attack(gm, cfg, seed=0)
        assert len(atk.node_set) == 4  # t* - 1
        assert verify_attack(gm, atk)
        t1 = encode_transcript(gm, atk.setup1, atk.node_set)
        t2 = encode_transcript(gm, atk.setup2, atk.node_set)
        assert t1.values == t2.values
        assert any(d != 0 for _, d in atk.delta)

    def test_strict_decode_reports_honest_ambiguity(self):
        cfg = SystemConfig(N=9, K=3, beta=1, v=2, p=P)
        gm = draw_mds(CTX, "random", 9, 3, seed=2)
        atk = converse_attack(gm, cfg, seed=3)
        tr = encode_transcript(gm, atk.setup1, atk.node_set)
        res = decode(gm, atk.node_set, tr, cfg, mode="strict")
        honest = set(atk.setup1.honest_sources)
        hit = honest & set(res.ambiguous_coordinates)
        assert hit
        # The witness pair for an ambiguous honest coordinate re-encodes to
        # the observed transcript while disagreeing on that coordinate.
        k = min(hit)
        sol_a, sol_b = res.witnesses[k]
        assert encode_transcript(gm, sol_a.to_behavior(cfg), atk.node_set).values == tr.values
        assert encode_transcript(gm, sol_b.to_behavior(cfg), atk.node_set).values == tr.values
        assert sol_a.honest_values.get(k) != sol_b.honest_values.get(k) or (
            k in sol_a.unpinned or k in sol_b.unpinned
        )

    def test_sharpness_one_more_encoder(self):
        # Extending the attacked set to t* encoders removes the ambiguity.
        cfg = SystemConfig(N=9, K=3, beta=1, v=2, p=P)
        gm = draw_mds(CTX, "random", 9, 3, seed=4)
        atk = converse_attack(gm, cfg, seed=5)
        extra = next(n for n in range(9) if n not in atk.node_set)
        nodes = atk.node_set + (extra,)
        tr = encode_transcript(gm, atk.setup1, nodes)
        res = decode(gm, nodes, tr, cfg, mode="strict")
        honest = set(atk.setup1.honest_sources)
        assert not honest & set(res.ambiguous_coordinates)
        assert verify_against_truth(res, atk.setup1).ok

    def test_v1_degenerates_to_undersampling(self):
        cfg = SystemConfig(N=6, K=3, beta=1, v=1, p=P)
        gm = draw_mds(CTX, "random", 6, 3, seed=6)
        atk = converse_attack(gm, cfg, seed=7)
        assert len(atk.node_set) == 2  # K - 1
        # Both setups are constant per source: two plain message vectors.
        for rows in (atk.setup1.rows, atk.setup2.rows):
            assert all(len(set(r)) == 1 for r in rows)
        assert verify_attack(gm, atk)

    def test_beta2_group_sizes(self):
        cfg = SystemConfig(N=12, K=4, beta=2, v=2, p=P)
        assert cfg.t_star == 8
        gm = draw_mds(CTX, "random", 12, 4, seed=8)
        atk = converse_attack(gm, cfg, seed=9)
        assert len(atk.node_set) == 7
        assert atk.configuration.group_sizes == (3, 2, 2)
        assert verify_attack(gm, atk)

    def test_reed_solomon_also_attacked_below_threshold(self):
        cfg = SystemConfig(N=9, K=3, beta=1, v=2, p=P)
        gm = gen_reed_solomon(CTX, 9, 3, seed=10)
        atk = converse_attack(gm, cfg, seed=11)
        assert verify_attack(gm, atk)
        tr = encode_transcript(gm, atk.setup1, atk.node_set)
        res = decode(gm, atk.node_set, tr, cfg, mode="strict")
        assert set(atk.setup1.honest_sources) & set(res.ambiguous_coordinates)

    def test_second_regime_systematic(self):
        cfg = SystemConfig(N=4, K=3, beta=1, v=2, p=P)
        assert cfg.t_star == 4
        gm = draw_mds(CTX, "systematic", 4, 3, seed=12)
        atk = converse_attack(gm, cfg, seed=13)
        assert len(atk.node_set) == 3
        assert verify_attack(gm, atk)
        tr = encode_transcript(gm, atk.setup1, atk.node_set)
        res = decode(gm, atk.node_set, tr, cfg, mode="strict")
        assert set(atk.setup1.honest_sources) & set(res.ambiguous_coordinates)

    def test_adversary_rows_respect_version_cap(self):
        cfg = SystemConfig(N=11, K=3, beta=1, v=3, p=P)
        gm = draw_mds(CTX, "random", 11, 3, seed=14)
        atk = converse_attack(gm, cfg, seed=15)
        for k in atk.adversaries:
            assert len(set(atk.setup1.rows[k])) <= 3
            assert len(set(atk.setup2.rows[k])) <= 3
        assert verify_attack(gm, atk)


class TestVerifyAttack:
    def _attack(self):
        cfg = SystemConfig(N=9, K=3, beta=1, v=2, p=P)
        gm = draw_mds(CTX, "random", 9, 3, seed=20)
        return cfg, gm, converse_attack(gm, cfg, seed=21)

    def test_constructed_attack_verifies(self):
        cfg, gm, atk = self._attack()
        assert verify_attack(gm, atk)

    def test_perturbed_setup_fails(self):
        cfg, gm, atk = self._attack()
        k = atk.setup2.honest_sources[0]
        rows = [list(r) for r in atk.setup2.rows]
        rows[k] = [(x + 1) % P for x in rows[k]]
        tampered = dataclasses.replace(
            atk,
            setup2=type(atk.setup2)(cfg, tuple(tuple(r) for r in rows), atk.setup2.adversary_set),
        )
        assert not verify_attack(gm, tampered)

    def test_version_cap_violation_fails(self):
        cfg, gm, atk = self._attack()
        loose = SystemConfig(N=9, K=3, beta=1, v=4, p=P)
        k = next(iter(atk.setup1.adversary_set))
        rows = [list(r) for r in atk.setup1.rows]
        free = [n for n in range(9) if n not in atk.node_set]
        rows[k][free[0]] = 111
        rows[k][free[1]] = 222  # now more than v=2 distinct values
        overloaded = type(atk.setup1)(loose, tuple(tuple(r) for r in rows), frozenset({k}))
        tampered = dataclasses.replace(atk, setup1=overloaded)
        assert not verify_attack(gm, tampered, cfg=cfg)

    def test_zero_delta_rejected_at_construction(self):
        cfg, gm, atk = self._attack()
        with pytest.raises(AttackConstructionFailed):
            dataclasses.replace(atk, delta=tuple((k, 0) for k, _ in atk.delta))
