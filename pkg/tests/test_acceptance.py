"""Acceptance suite.

Each test covers one acceptance criterion at its stated strength and prints
one PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).
Counts are exact: the guarantees under test are worst-case, so the expected
success rates are 100% with zero tolerance, except the documented
probabilistic allowance in the MDS criterion.
"""

import random
import time

from distcode import (
    ExperimentSpec,
    FieldMatrix,
    decode,
    default_spec,
    diff_basis,
    draw_mds,
    emit_results,
    encode_transcript,
    field_new,
    gen_random_linear,
    gen_reed_solomon,
    is_mds,
    partition_full_rank,
    rank,
    run_achievability,
    run_converse,
    run_experiments,
)
from distcode.system import SystemConfig, behavior_random_adversarial

from oracles import labeled_feasible_projections, strict_result_projections
from test_attacks import engineered_repair_input, instantiate_difference

P = 2**31 - 1
CTX = field_new(P)

# (N, K, beta, v) for the four first-regime cells.
THRESHOLD_CELLS = ((9, 3, 1, 2), (10, 4, 1, 2), (11, 3, 1, 3), (12, 4, 2, 2))


def report(num: int, name: str, ok: bool, detail: str):
    line = f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert ok, line


def test_criterion_1_threshold_reproduction():
    start = time.perf_counter()
    spec = ExperimentSpec(cells=THRESHOLD_CELLS, kinds=("random",), trials=100, seed=101)
    results = run_achievability(spec)
    elapsed = time.perf_counter() - start
    rates = {(r.N, r.K, r.beta, r.v): r.honest_correct for r in results}
    ok = all(r.honest_correct == 100 and r.t == r.K + 2 * r.beta * (r.v - 1) for r in results)
    ok = ok and elapsed < 120
    report(1, "threshold reproduction", ok, f"rates={rates}, {elapsed:.1f}s")


def test_criterion_2_converse_sharpness():
    start = time.perf_counter()
    spec = ExperimentSpec(cells=THRESHOLD_CELLS, kinds=("random",), trials=50, seed=202)
    results = run_converse(spec)
    elapsed = time.perf_counter() - start
    detail = {(r.N, r.K): (r.ambiguous, r.failures) for r in results}
    ok = all(r.ambiguous == 50 and r.failures == 0 for r in results)
    ok = ok and elapsed < 300
    report(2, "converse sharpness at t*-1", ok, f"ambiguous/failures={detail}, {elapsed:.1f}s")


def test_criterion_3_second_regime():
    start = time.perf_counter()
    cell = ((4, 3, 1, 2),)
    ach = run_achievability(
        ExperimentSpec(cells=cell, kinds=("systematic",), trials=100, seed=303)
    )[0]
    con = run_converse(
        ExperimentSpec(cells=cell, kinds=("systematic",), trials=50, seed=304)
    )[0]
    elapsed = time.perf_counter() - start
    ok = ach.t == 4 and ach.honest_correct == 100
    ok = ok and con.t == 3 and con.ambiguous == 50 and con.failures == 0
    report(
        3,
        "second regime (t* = N, systematic)",
        ok,
        f"t=4 correct={ach.honest_correct}/100, t=3 ambiguous={con.ambiguous}/50, {elapsed:.1f}s",
    )


def test_criterion_4_reed_solomon_achievability():
    start = time.perf_counter()
    spec = ExperimentSpec(
        cells=THRESHOLD_CELLS, kinds=("reed_solomon",), trials=100, seed=404
    )
    results = run_achievability(spec)
    elapsed = time.perf_counter() - start
    rates = {(r.N, r.K): r.honest_correct for r in results}
    ok = all(r.honest_correct == 100 for r in results)
    report(4, "Reed-Solomon achievability", ok, f"rates={rates}, {elapsed:.1f}s")


def test_criterion_5_difference_basis_identity():
    start = time.perf_counter()
    rng = random.Random(505)
    failures = 0
    checks = 0
    for v in (2, 3, 4, 5):
        basis = diff_basis(v)
        for i in range(v):
            for j in range(v):
                for _ in range(100):
                    a = [rng.randrange(P) for _ in range(v)]
                    b = [rng.randrange(P) for _ in range(v)]
                    checks += 1
                    if instantiate_difference(basis, (i, j), a, b, P) != (a[i] - b[j]) % P:
                        failures += 1
    elapsed = time.perf_counter() - start
    report(
        5,
        "difference-basis identity",
        failures == 0,
        f"{checks} instantiations, {failures} failures, {elapsed:.1f}s",
    )


def test_criterion_6_partition_suite():
    start = time.perf_counter()
    rng = random.Random(606)
    combos = [(2, 1, 2), (2, 2, 2), (3, 2, 3)]
    counts = (67, 67, 66)
    good = 0
    total = 0
    for (h, beta, v), n in zip(combos, counts):
        t = h + 2 * beta * v - beta - 1
        for _ in range(n):
            E = FieldMatrix(
                CTX, [[rng.randrange(P) for _ in range(beta)] for _ in range(t)]
            )
            blocks = partition_full_rank(E, h, beta, v)
            sizes_ok = tuple(len(b) for b in blocks) == (h + beta - 1,) + (beta,) * (2 * v - 2)
            ranks_ok = all(
                rank(E.submatrix(b, range(beta))) == beta for b in blocks
            )
            total += 1
            good += sizes_ok and ranks_ok

    repaired = 0
    for seed, (h, beta, v) in enumerate([(2, 2, 2), (2, 2, 2), (2, 2, 2), (3, 2, 3), (3, 2, 3)]):
        E = engineered_repair_input(1000 + seed, h, beta, v)
        t = E.rows
        tail = list(range(t - (h + beta - 1), t))
        assert rank(E.submatrix(tail, range(beta))) == beta - 1  # repair must trigger
        blocks = partition_full_rank(E, h, beta, v)
        if set(blocks[0]) != set(tail) and all(
            rank(E.submatrix(b, range(beta))) == beta for b in blocks
        ):
            repaired += 1
    elapsed = time.perf_counter() - start
    ok = good == total == 200 and repaired == 5
    report(
        6,
        "full-rank partition suite",
        ok,
        f"{good}/200 random inputs, {repaired}/5 exchange repairs, {elapsed:.1f}s",
    )


def test_criterion_7_decoder_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(707)
    matches = 0
    for _ in range(50):
        K = rng.choice([2, 3])
        v = rng.choice([2, 3])
        N = rng.randrange(K + 1, 8)
        t = rng.randrange(K, min(6, N) + 1)
        cfg = SystemConfig(N=N, K=K, beta=1, v=v, p=P)
        gm = draw_mds(CTX, "random", N, K, seed=rng.randrange(1 << 30))
        behavior = behavior_random_adversarial(
            cfg,
            [rng.randrange(P) for _ in range(K)],
            (rng.randrange(K),),
            seed=rng.randrange(1 << 30),
        )
        nodes = tuple(sorted(rng.sample(range(N), t)))
        tr = encode_transcript(gm, behavior, nodes)
        res = decode(gm, nodes, tr, cfg, mode="strict")
        if strict_result_projections(res) == labeled_feasible_projections(gm, nodes, tr, cfg):
            matches += 1
    elapsed = time.perf_counter() - start
    report(
        7,
        "labeled/unlabeled enumeration equivalence",
        matches == 50,
        f"{matches}/50 instances, {elapsed:.1f}s",
    )


def test_criterion_8_mds_verification():
    start = time.perf_counter()
    random_pass = sum(
        1 for seed in range(10_000) if is_mds(gen_random_linear(CTX, 8, 4, seed=seed))
    )
    rs_pass = sum(
        1 for seed in range(10_000) if is_mds(gen_reed_solomon(CTX, 8, 4, seed=seed))
    )
    elapsed = time.perf_counter() - start
    ok = random_pass >= 9_999 and rs_pass == 10_000
    report(
        8,
        "exhaustive MDS verification",
        ok,
        f"random {random_pass}/10000, reed_solomon {rs_pass}/10000, {elapsed:.1f}s",
    )


def test_criterion_9_sweep_determinism(tmp_path):
    start = time.perf_counter()
    spec = default_spec()
    paths = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        emit_results(
            run_experiments(spec), "csv", path, meta={"master_seed": spec.seed}
        )
        paths.append(path)
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    elapsed = time.perf_counter() - start
    report(
        9,
        "default sweep byte-determinism",
        identical,
        f"{paths[0].stat().st_size} bytes each, {elapsed:.1f}s",
    )
