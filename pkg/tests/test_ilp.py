import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxplus.errors import InstanceTooLarge, PreconditionViolated
from maxplus.ilp import (
    HalvingGraph,
    IlpInstance,
    Status,
    brute_force_ilp,
    decompose_solution,
    halve_upper_bounds,
    halving_chain,
    iterate_decomposition,
    lp_relax,
    proximity_radius,
    scaled_distance,
    solve_divide_conquer,
    solve_proximity,
)

EXAMPLE = IlpInstance([[1, 2]], [3], [1, 1], None, [3, 1])
PARITY = IlpInstance([[2]], [3], [1], None, [5])
SOLVERS = [brute_force_ilp, solve_proximity, solve_divide_conquer]


@pytest.mark.parametrize("solver", SOLVERS)
def test_examples(solver):
    res = solver(EXAMPLE)
    assert res.status is Status.OPTIMAL and res.value == 3 and res.x == (3, 0)
    assert solver(PARITY).status is Status.INFEASIBLE
    zero = solver(IlpInstance([[1, -1]], [0], [-2, -1], None, [2, 2]))
    assert zero.value == 0 and zero.x == (0, 0)


@pytest.mark.parametrize("solver", SOLVERS)
def test_zero_upper_bounds(solver):
    assert solver(IlpInstance([[1, 1]], [0], [3, 4], None, [0, 0])).value == 0
    assert solver(IlpInstance([[1, 1]], [1], [3, 4], None, [0, 0])).status is Status.INFEASIBLE


@pytest.mark.parametrize("solver", SOLVERS)
def test_lower_bounds_are_normalized(solver):
    inst = IlpInstance([[1, 1]], [1], [2, 1], [-1, 0], [2, 2])
    res = solver(inst)
    assert res.value == brute_force_ilp(inst).value == 2 and inst.is_feasible(res.x)


def test_lp_examples():
    lp = lp_relax(IlpInstance([[1]], [3], [1], None, [5]))
    assert lp.status is Status.OPTIMAL and lp.x == (3,) and lp.value == 3
    lp = lp_relax(IlpInstance([[1, 1]], [3], [2, 1], None, [2, 2]))
    assert lp.x == (2, 1) and lp.value == 5
    assert lp_relax(IlpInstance([[1, 1]], [7], [1, 1], None, [2, 2])).status is Status.INFEASIBLE


def test_lp_fractional_optimum():
    lp = lp_relax(IlpInstance([[2, 2]], [3], [1, 0], None, [5, 5]))
    assert lp.x == (Fraction(3, 2), 0) and lp.value == Fraction(3, 2)


def test_lp_redundant_rows():
    lp = lp_relax(IlpInstance([[1, 1], [2, 2]], [2, 4], [1, 2], None, [2, 2]))
    assert lp.status is Status.OPTIMAL and lp.value == 4


def vertices_by_enumeration(inst):
    """Best LP value over vertices.

    Each variable sits at 0, at its upper bound, or is free; a vertex is a
    choice whose free columns pin down a unique consistent solution.
    """
    n, d = inst.n, inst.d
    best = None
    for state in itertools.product((0, 1, 2), repeat=n):
        x = [Fraction(0)] * n
        free = []
        for i, s in enumerate(state):
            if s == 1:
                x[i] = Fraction(inst.upper[i])
            elif s == 2:
                free.append(i)
        rhs = [Fraction(bi) - sum(inst.A[r][i] * x[i] for i in range(n)) for r, bi in enumerate(inst.b)]
        M = [[Fraction(inst.A[r][i]) for i in free] + [rhs[r]] for r in range(d)]
        sol = _solve_unique(M, len(free))
        if sol is None:
            continue
        for i, v in zip(free, sol):
            x[i] = v
        if all(0 <= x[i] <= inst.upper[i] for i in range(n)):
            val = sum(Fraction(c) * xi for c, xi in zip(inst.c, x))
            best = val if best is None else max(best, val)
    return best


def _solve_unique(M, k):
    """Gauss-Jordan on a ``rows x (k + 1)`` augmented matrix; None unless exactly one solution."""
    M = [list(row) for row in M]
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, len(M)) if M[r][col] != 0), None)
        if piv is None:
            return None  # a free column is dependent on the others
        M[row], M[piv] = M[piv], M[row]
        M[row] = [v / M[row][col] for v in M[row]]
        for r in range(len(M)):
            if r != row and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[row])]
        row += 1
    if any(M[r][-1] != 0 for r in range(row, len(M))):
        return None  # inconsistent
    return [M[r][-1] for r in range(k)]


@st.composite
def ilp_instances(draw, max_d=2, max_n=6, max_delta=2, max_u=3, lower=True):
    d = draw(st.integers(1, max_d))
    n = draw(st.integers(1, max_n))
    delta = draw(st.integers(0, max_delta))
    A = [draw(st.lists(st.integers(-delta, delta), min_size=n, max_size=n)) for _ in range(d)]
    u = draw(st.lists(st.integers(0, max_u), min_size=n, max_size=n))
    lo = [draw(st.integers(-1, ui)) if lower else 0 for ui in u]
    c = draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n))
    if draw(st.booleans()):
        x = [draw(st.integers(li, ui)) for li, ui in zip(lo, u)]
        b = [sum(a * xi for a, xi in zip(row, x)) for row in A]
    else:
        b = draw(st.lists(st.integers(-4, 4), min_size=d, max_size=d))
    return IlpInstance(A, b, c, lo, u)


@given(ilp_instances(max_n=4, lower=False))
def test_lp_value_matches_vertex_enumeration(inst):
    lp = lp_relax(inst)
    best = vertices_by_enumeration(inst)
    if best is None:
        assert lp.status is Status.INFEASIBLE
    else:
        assert lp.status is Status.OPTIMAL and lp.value == best
        assert inst.row_dot(lp.x) == inst.b and all(0 <= xi <= ui for xi, ui in zip(lp.x, inst.upper))


@given(ilp_instances())
def test_solvers_match_brute_force(inst):
    ref = brute_force_ilp(inst)
    for solver in (solve_proximity, solve_divide_conquer):
        res = solver(inst)
        assert res.status == ref.status and res.value == ref.value
        if res.x is not None:
            assert inst.is_feasible(res.x) and inst.value(res.x) == res.value


def test_brute_force_examples_and_guard():
    assert brute_force_ilp(EXAMPLE).x == (3, 0)
    with pytest.raises(InstanceTooLarge):
        brute_force_ilp(IlpInstance([[1] * 8], [0], [0] * 8, None, [9] * 8))


def test_proximity_radius_examples():
    assert proximity_radius(1, 1) == 4
    assert proximity_radius(2, 1) == 52
    assert proximity_radius(3, 0) == 6


def test_integral_lp_optimum_has_zero_deviation():
    inst = IlpInstance([[1, 1]], [3], [2, 1], None, [2, 2])
    assert solve_proximity(inst).value == lp_relax(inst).value == 5


def test_identical_columns_grouped():
    inst = IlpInstance([[1, 1, 1]], [4], [3, 5, 1], None, [2, 2, 2])
    res = solve_proximity(inst)
    assert res.value == 16 and res.x == (2, 2, 0)


def test_halve_examples():
    assert halve_upper_bounds((5, 2)) == (2, 0)
    assert halve_upper_bounds((0,)) == (0,)
    assert halving_chain((3,)) == [(3,), (1,), (0,)]
    with pytest.raises(PreconditionViolated):
        halve_upper_bounds((-1,))


def test_decompose_examples():
    x1, ok1 = decompose_solution((5,), (5,), [[1]])
    assert x1 == (2,) and ok1.ok
    x2, ok2 = decompose_solution((2,), (2,), [[1]])
    assert x2 == (0,) and ok2.ok
    x3, ok3 = decompose_solution((0, 0), (3, 4), [[1, 1]])
    assert x3 == (0, 0) and ok3.ok
    with pytest.raises(PreconditionViolated):
        decompose_solution((3,), (2,), [[1]])


@given(st.data())
def test_decomposition_properties(data):
    n = data.draw(st.integers(1, 3))
    d = data.draw(st.integers(1, 2))
    A = [data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n)) for _ in range(d)]
    u = data.draw(st.lists(st.integers(0, 12), min_size=n, max_size=n))
    x = [data.draw(st.integers(0, ui)) for ui in u]
    _, check = decompose_solution(x, u, A)
    assert check.ok
    b = [sum(a * xi for a, xi in zip(row, x)) for row in A]
    delta = max(abs(v) for row in A for v in row)
    for j, xj in enumerate(iterate_decomposition(x, u, A)):
        assert scaled_distance(A, xj, b, j) <= 2 * n * delta


@given(ilp_instances(lower=False))
def test_halving_graph_size_bound(inst):
    graph = HalvingGraph()
    solve_divide_conquer(inst, graph)
    if graph.levels:
        assert graph.vertices <= graph.vertex_bound(inst.n, inst.delta, inst.d)


def test_negative_optimum():
    inst = IlpInstance([[1, 1]], [3], [-2, -3], None, [2, 2])
    for solver in SOLVERS:
        assert solver(inst).value == -7


def test_no_constraints():
    inst = IlpInstance([], [], [2, -1], None, [3, 3])
    for solver in SOLVERS:
        assert solver(inst).value == 6
