"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
under output capture) or directly with ``python3 tests/test_acceptance.py``.
"""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from maxplus.cli import bench_rows
from maxplus.ilp import (
    IlpInstance,
    Status,
    brute_force_ilp,
    decompose_solution,
    iterate_decomposition,
    scaled_distance,
    solve_divide_conquer,
    solve_proximity,
)
from maxplus.knapsack import Item, KnapsackInstance, Variant, brute_force, solve_exact_eq, to_at_most
from maxplus.maxconv import conv1d_concave, conv1d_naive, conv_naive, conv_via_linearization
from maxplus.mdarray import NEG_INF, MDArray
from maxplus.reductions import knapsack_via_conv
from maxplus.ring import RingConfig, run_ring


@pytest.fixture
def report(capsys):
    def emit(number, name, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {name}: {detail}")

    return emit


def sizes_up_to(volume, max_d):
    """Every size tuple with at most ``max_d`` dimensions and product <= ``volume``."""

    def grow(prefix, room, left):
        if prefix:
            yield prefix
        if left:
            for x in range(1, room + 1):
                yield from grow(prefix + (x,), room // x, left - 1)

    yield from grow((), volume, max_d)


# -- 1 -----------------------------------------------------------------------


def test_1_linearization_matches_naive(report):
    start = time.perf_counter()
    checked = bad = 0
    # every size with volume <= 16 and values in {-2..2}; all value pairs
    # are enumerated for volume <= 2, larger sizes get 100 seeded pairs each
    values = range(-2, 3)
    for L in sizes_up_to(16, 3):
        m = math.prod(L)
        if m <= 2:
            pairs = itertools.product(itertools.product(values, repeat=m), repeat=2)
        else:
            rng = np.random.default_rng(m)
            pairs = (
                (rng.integers(-2, 3, size=m).tolist(), rng.integers(-2, 3, size=m).tolist()) for _ in range(100)
            )
        for a, b in pairs:
            A, B = MDArray.from_values(L, list(a)), MDArray.from_values(L, list(b))
            checked += 1
            bad += conv_via_linearization(A, B, conv1d_naive) != conv_naive(A, B)
    rng = np.random.default_rng(1)
    all_sizes = list(sizes_up_to(512, 3))
    for _ in range(1000):
        L = all_sizes[rng.integers(len(all_sizes))]
        a = rng.integers(-50, 51, size=math.prod(L)).tolist()
        b = rng.integers(-50, 51, size=math.prod(L)).tolist()
        for v in (a, b):
            for k in rng.integers(0, len(v), size=rng.integers(0, 3)):
                v[k] = NEG_INF
        A, B = MDArray.from_values(L, a), MDArray.from_values(L, b)
        checked += 1
        bad += conv_via_linearization(A, B, conv1d_naive) != conv_naive(A, B)
    secs = time.perf_counter() - start
    ok = bad == 0 and secs < 30
    report(1, "linearization == naive", ok, f"{checked} pairs, {bad} mismatches, {secs:.1f}s (limit 30s)")
    assert ok


# -- 2 -----------------------------------------------------------------------


def random_concave(rng, n):
    """Concave sequence of length n, optionally wrapped in NEG_INF prefix/suffix."""
    steps = np.sort(rng.integers(-20, 21, size=max(0, n - 1)))[::-1]
    a = [int(rng.integers(-30, 31))]
    for s in steps:
        a.append(a[-1] + int(s))
    if n > 2 and rng.random() < 0.3:
        lo, hi = sorted(rng.integers(0, n, size=2))
        a = [NEG_INF] * lo + a[lo : hi + 1] + [NEG_INF] * (n - hi - 1)
    return a


def test_2_concave_conv(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    bad = 0
    for _ in range(1000):
        n, m = (int(x) for x in rng.integers(1, 501, size=2))
        r = rng.integers(-1000, 1001, size=n).tolist()
        for k in rng.integers(0, n, size=rng.integers(0, 4)):
            r[k] = NEG_INF
        a = random_concave(rng, m)
        out_len = int(rng.integers(1, n + m))
        got = conv1d_concave(r, a, out_len)
        ref = conv1d_naive(MDArray.from_values((n,), r), MDArray.from_values((m,), a), out_len)
        bad += got != ref
    equal_secs = time.perf_counter() - start

    lengths, times = [], []
    for e in range(10, 17):
        n = 2**e
        r = rng.integers(-(10**6), 10**6, size=n // 2).tolist()
        a = [-(i * i) for i in range(n // 2 + 1)]
        best = min(_timed(lambda: conv1d_concave(r, a, n)) for _ in range(3))
        lengths.append(n)
        times.append(best)
    slope = float(np.polyfit(np.log(lengths), np.log(times), 1)[0])
    secs = time.perf_counter() - start
    ok = bad == 0 and slope <= 1.2 and secs < 60
    report(
        2,
        "concave conv == naive, near-linear",
        ok,
        f"1000 pairs, {bad} mismatches ({equal_secs:.1f}s); log-log slope {slope:.3f} (limit 1.2); {secs:.1f}s (limit 60s)",
    )
    assert ok


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


# -- 3 -----------------------------------------------------------------------


def tiny_knapsack_grid():
    """Exhaustive tiny instances at the largest capacity of each dimension.

    Exact-weight tables restrict to smaller capacities, so ``t = (4,)`` and
    ``t = (4, 4)`` cover every ``t`` below them. Item types range over all
    weights ``0..3`` per component and all profits ``-3..5``.
    """
    profits = range(-3, 6)
    for d in (1, 2):
        t = (4,) * d
        types = [Item(w, p, 1) for w in itertools.product(range(4), repeat=d) for p in profits]
        max_n = 3 if d == 1 else 2
        for n in range(max_n + 1):
            for combo in itertools.combinations_with_replacement(types, n):
                yield KnapsackInstance(list(combo), t, Variant.BOUNDED)
        # n = 3, 4 in two dimensions: every weight multiset, profits from a seeded stream
        rng = np.random.default_rng(3)
        if d == 2:
            weights = list(itertools.product(range(4), repeat=2))
            for n in (3, 4):
                for combo in itertools.combinations_with_replacement(weights, n):
                    yield KnapsackInstance(
                        [Item(w, int(rng.integers(-3, 6)), int(rng.integers(1, 3))) for w in combo], t, Variant.BOUNDED
                    )


def test_3_class_convolution_solver(report):
    start = time.perf_counter()
    checked = bad = 0
    for inst in tiny_knapsack_grid():
        checked += 1
        bad += solve_exact_eq(inst).array != brute_force(inst).array
    grid = checked
    rng = np.random.default_rng(33)
    for _ in range(500):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(0, 13))
        t = tuple(int(x) for x in rng.integers(0, 9, size=d))
        items = [
            Item(
                tuple(int(rng.integers(0, ti + 2)) for ti in t),
                int(rng.integers(-5, 11)),
                int(rng.integers(1, 3)),
            )
            for _ in range(n)
        ]
        inst = KnapsackInstance(items, t, Variant.BOUNDED)
        checked += 1
        bad += solve_exact_eq(inst).array != brute_force(inst).array
    secs = time.perf_counter() - start
    ok = bad == 0 and secs < 60
    report(3, "class convolution == brute force", ok, f"{grid} grid + 500 random, {bad} mismatches, {secs:.1f}s (limit 60s)")
    assert ok


# -- 4 -----------------------------------------------------------------------


def test_4_reduction_ring(report):
    start = time.perf_counter()
    rep = run_ring(RingConfig(dims=2, max_size=8, trials=200, seed=4))
    secs = time.perf_counter() - start
    names = {r.name for r in rep.rows}
    required = {"binary_encoding", "monotonize", "primal_dual", "block_array", "oracle_conv"}
    ok = rep.ok and required <= names and all(r.passed == 200 for r in rep.rows) and secs < 120
    detail = ", ".join(f"{r.name} {r.passed}/{r.passed + r.failed}" for r in rep.rows)
    report(4, "reduction ring", ok, f"{detail}; {secs:.1f}s (limit 120s)")
    assert ok


# -- 5 -----------------------------------------------------------------------


def test_5_randomized_reduction(report):
    start = time.perf_counter()
    sound_positions = total_positions = exact_runs = 0
    for seed in range(200):
        rng = np.random.default_rng([5, seed])
        d = int(rng.integers(1, 3))
        n = int(rng.integers(0, 11))
        t = tuple(int(x) for x in rng.integers(1, 7, size=d))
        items = [
            Item(tuple(int(rng.integers(0, ti + 1)) for ti in t), int(rng.integers(-3, 11)), 1) for _ in range(n)
        ]
        inst = KnapsackInstance(items, t, Variant.ZERO_ONE)
        got = knapsack_via_conv(inst, 0.25, seed).array.nd
        ref = to_at_most(brute_force(inst)).array.nd
        sound_positions += int(np.count_nonzero(got <= ref))
        total_positions += got.size
        exact_runs += bool(np.array_equal(got, ref))
    secs = time.perf_counter() - start
    rate = exact_runs / 200
    ok = sound_positions == total_positions and rate >= 0.75 and secs < 600
    report(
        5,
        "randomized reduction",
        ok,
        f"soundness {sound_positions}/{total_positions} positions, exact runs {exact_runs}/200 = {rate:.1%} "
        f"(need 75%), {secs:.1f}s (limit 600s)",
    )
    assert ok


# -- 6 -----------------------------------------------------------------------


def test_6_halving_decomposition(report):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    checked = violations = 0
    for n in (1, 2, 3):
        for u in itertools.product(range(5), repeat=n):
            A_list = [rng.integers(-3, 4, size=(int(rng.integers(1, 4)), n)).tolist() for _ in range(2)]
            for x in itertools.product(*(range(ui + 1) for ui in u)):
                for A in A_list:
                    checked += 1
                    delta = max(abs(v) for row in A for v in row)
                    _, check = decompose_solution(x, u, A)
                    b = [sum(a * xi for a, xi in zip(row, x)) for row in A]
                    xs = iterate_decomposition(x, u, A)
                    iterated = all(
                        scaled_distance(A, xj, b, j) <= Fraction(2 * n * delta) for j, xj in enumerate(xs)
                    )
                    ends_at_zero = not any(xs[-1])
                    violations += not (check.ok and iterated and ends_at_zero)
    secs = time.perf_counter() - start
    ok = violations == 0 and secs < 30
    report(6, "halving decomposition", ok, f"{checked} (x, u, A) cases, {violations} violations, {secs:.1f}s (limit 30s)")
    assert ok


# -- 7 -----------------------------------------------------------------------


def _ilp_agrees(inst, ref, res) -> bool:
    if res.status is not ref.status:
        return False
    if ref.status is Status.INFEASIBLE:
        return res.x is None
    return res.value == ref.value and inst.is_feasible(res.x) and inst.value(res.x) == res.value


def tiny_ilp_grid():
    """One constraint, up to two variables: every matrix, bound, target and profit pattern in a small box."""
    for n in (1, 2):
        for A in itertools.product(range(-2, 3), repeat=n):
            for u in itertools.product(range(3), repeat=n):
                for b in range(-3, 4):
                    for c in itertools.product((-1, 0, 2), repeat=n):
                        yield IlpInstance([list(A)], [b], list(c), None, list(u))


def test_7_ilp_solvers(report):
    start = time.perf_counter()
    checked = 0
    bad = {"proximity": 0, "divconq": 0}
    solvers = {"proximity": solve_proximity, "divconq": solve_divide_conquer}

    def check(inst):
        ref = brute_force_ilp(inst)
        for name, solve in solvers.items():
            bad[name] += not _ilp_agrees(inst, ref, solve(inst))

    for inst in tiny_ilp_grid():
        checked += 1
        check(inst)
    grid = checked
    rng = np.random.default_rng(7)
    for _ in range(500):
        d = int(rng.integers(1, 3))
        n = int(rng.integers(1, 7))
        A = rng.integers(-2, 3, size=(d, n))
        u = rng.integers(0, 4, size=n)
        if rng.random() < 0.7:
            b = A @ rng.integers(0, u + 1)
        else:
            b = rng.integers(-4, 5, size=d)
        inst = IlpInstance(A.tolist(), b.tolist(), rng.integers(-5, 6, size=n).tolist(), None, u.tolist())
        checked += 1
        check(inst)
    secs = time.perf_counter() - start
    ok = not any(bad.values()) and secs < 300
    report(
        7,
        "ILP solvers == brute force",
        ok,
        f"{grid} grid + 500 random; mismatches proximity {bad['proximity']}, divconq {bad['divconq']}; "
        f"{secs:.1f}s (limit 300s)",
    )
    assert ok


# -- 8 -----------------------------------------------------------------------


def test_8_knapsack_scaling(report):
    rows = bench_rows("knapsack", [1, 10], repeats=5, seed=8)
    times = {(r["solver"], r["params"]): r["wall_ns"] for r in rows}
    params = sorted({r["params"] for r in rows}, key=lambda p: int(p.split(";")[0].split("=")[1]))
    ratio = {s: times[(s, params[1])] / times[(s, params[0])] for s in ("classconv", "bellman")}
    ok = ratio["classconv"] < 2 and ratio["bellman"] >= 5
    report(
        8,
        "knapsack scaling in multiplicity",
        ok,
        f"{params[0]} -> {params[1]}: classconv x{ratio['classconv']:.2f} (need < 2), "
        f"bellman x{ratio['bellman']:.2f} (need >= 5)",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
