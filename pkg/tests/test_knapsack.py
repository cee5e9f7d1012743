import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxplus.errors import InstanceTooLarge, UnboundedProfit
from maxplus.knapsack import (
    ClassStats,
    Item,
    KnapsackInstance,
    Semantics,
    SolutionArray,
    Variant,
    bellman_dp,
    brute_force,
    profit_sequence,
    solve,
    solve_exact_eq,
    to_at_most,
)
from maxplus.mdarray import NEG_INF, MDArray, monotone_increasing, positions

SOLVERS = [brute_force, bellman_dp, solve_exact_eq]
X = NEG_INF


def enumerate_table(inst):
    """Exact-weight table by plain itertools enumeration of multiplicity vectors."""
    t = inst.capacity
    ranges = [range(it.effective_bound(t) + 1) for it in inst.items]
    best = {}
    for counts in itertools.product(*ranges):
        w = tuple(sum(c * it.weight[i] for c, it in zip(counts, inst.items)) for i in range(inst.d))
        if all(a <= b for a, b in zip(w, t)):
            p = sum(c * it.profit for c, it in zip(counts, inst.items))
            best[w] = max(best.get(w, p), p)
    return [best.get(v, X) for v in positions(inst.array_size)]


EX_1D = KnapsackInstance([Item((2,), 3, 2), Item((1,), 1, 1)], (3,))
EX_2D = KnapsackInstance([Item((1, 1), 2, 2), Item((2, 1), 3, 1)], (2, 2))
EX_UNB = KnapsackInstance([Item((2,), 5, None)], (5,), Variant.UNBOUNDED)


@pytest.mark.parametrize("solver", SOLVERS)
def test_examples(solver):
    assert solver(KnapsackInstance([], (2,))).array.values() == [0, X, X]
    assert solver(EX_1D).array.values() == [0, 1, 3, 4]
    assert solver(EX_2D).array.values() == [0, X, X, X, 2, 3, X, X, 4]
    assert solver(EX_UNB).array.values() == [0, X, 5, X, 10, X]
    assert solver(KnapsackInstance([Item((1,), 1, 3)], (3,))).array.values() == [0, 1, 2, 3]


def test_examples_match_enumeration():
    for inst in (EX_1D, EX_2D, EX_UNB):
        assert brute_force(inst).array.values() == enumerate_table(inst)


def test_profit_sequence_examples():
    assert profit_sequence([Item((1,), 5, 1), Item((1,), 3, 1)], 2) == [0, 5, 8]
    assert profit_sequence([Item((1,), 4, 3)], 3) == [0, 4, 8, 12]
    assert profit_sequence([Item((1,), 5, 1), Item((1,), -1, 2)], 3) == [0, 5, 4, 3]


@given(st.lists(st.tuples(st.integers(-5, 9), st.integers(1, 3)), min_size=1, max_size=5), st.integers(0, 10))
def test_profit_sequence_is_concave_and_optimal(profit_bounds, k_max):
    items = [Item((1,), p, b) for p, b in profit_bounds]
    f = profit_sequence(items, k_max)
    assert f[0] == 0
    assert all(f[i + 1] - f[i] >= f[i + 2] - f[i + 1] for i in range(len(f) - 2))
    pool = [p for p, b in profit_bounds for _ in range(b)]
    for k, val in enumerate(f):
        assert val == max(sum(c) for c in itertools.combinations(pool, k))


def test_to_at_most_examples():
    sol = SolutionArray(MDArray.from_values((3,), [0, None, 5]))
    assert to_at_most(sol).array.values() == [0, 0, 5]
    at_most = to_at_most(brute_force(EX_2D))
    assert at_most.array[(2, 2)] == 4 and at_most.array[(1, 0)] == 0
    assert at_most.semantics is Semantics.AT_MOST_WEIGHT
    assert to_at_most(at_most) == at_most


def test_single_weight_class_places_profit_sequence():
    items = [Item((2, 1), 4, 2), Item((2, 1), 1, 1)]
    R = solve_exact_eq(KnapsackInstance(items, (6, 3))).array
    f = profit_sequence(items, 3)
    for k in range(4):
        assert R[(2 * k, k)] == f[k]
    assert sum(1 for v in R.values() if v is not NEG_INF) == 4


def test_zero_weight_items_become_offset():
    inst = KnapsackInstance([Item((0,), 4, 2), Item((0,), -3, 1), Item((1,), 1, 1)], (2,))
    for solver in SOLVERS:
        assert solver(inst).array.values() == [8, 9, X]


def test_zero_weight_unbounded_positive_profit_rejected():
    with pytest.raises(UnboundedProfit):
        solve_exact_eq(KnapsackInstance([Item((0,), 1, None)], (2,), Variant.UNBOUNDED))


def test_variant_validation():
    with pytest.raises(ValueError):
        KnapsackInstance([Item((1,), 1, 2)], (2,), Variant.ZERO_ONE)
    with pytest.raises(ValueError):
        KnapsackInstance([Item((1,), 1, 2)], (2,), Variant.UNBOUNDED)


def test_brute_force_guard():
    items = [Item((1,), 1, 99) for _ in range(5)]
    with pytest.raises(InstanceTooLarge):
        brute_force(KnapsackInstance(items, (10**6,)), limit=10**5)


@st.composite
def instances(draw, max_d=2, max_n=4, max_t=4, max_w=3):
    d = draw(st.integers(1, max_d))
    t = tuple(draw(st.lists(st.integers(0, max_t), min_size=d, max_size=d)))
    n = draw(st.integers(0, max_n))
    items = []
    for _ in range(n):
        w = tuple(draw(st.lists(st.integers(0, max_w), min_size=d, max_size=d)))
        p = draw(st.integers(-3, 5))
        bound = draw(st.one_of(st.none(), st.integers(1, 3)))
        if bound is None and not any(w) and p > 0:
            bound = 1
        items.append(Item(w, p, bound))
    return KnapsackInstance(items, t, Variant.BOUNDED)


@given(instances())
def test_solvers_agree(inst):
    want = enumerate_table(inst)
    stats = ClassStats()
    assert solve_exact_eq(inst, stats).array.values() == want
    assert bellman_dp(inst).array.values() == want
    assert brute_force(inst).array.values() == want
    assert all(v == int(np.prod(inst.array_size)) for v in stats.visited_per_weight)


@given(instances(max_d=3, max_n=6, max_t=5))
def test_at_most_is_monotone_and_best_matches(inst):
    sol = to_at_most(solve_exact_eq(inst))
    assert monotone_increasing(sol.array)
    finite = [v for v in brute_force(inst).array.values() if v is not NEG_INF]
    assert sol.best() == max(finite)


def test_solve_dispatch():
    for name in ("classconv", "bellman", "brute"):
        assert solve(EX_1D, name).array.values() == [0, 1, 3, 4]
