"""ILP by repeated halving of the upper bounds and a longest path with doubling edges.

Any solution ``x <= u`` splits as ``x = 2 x' + r`` with ``x' <= u'`` (the
halved bounds) and ``0 <= r <= u - 2u' <= 2``, while ``A x'`` stays within
``n * Delta`` of ``b / 2``. Iterating until the bounds reach zero gives a
layered DAG: vertex ``(b', j, i)`` means "right-hand side ``b'`` at halving
level ``j`` after deciding the remainders of the first ``i`` columns".
Column edges add a remainder ``r_i``; the edge from the last column of level
``j`` to level ``j - 1`` doubles both the right-hand side and the path value.

Each layer ``(j, i)`` is a dense numpy box around ``b / 2^j`` of half-width
``2 (2n - i) Delta``, so every relaxation step is a vectorized shift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import ArithmeticOverflow, InstanceTooLarge, PreconditionViolated
from ..mdarray import FINITE_MAX, NEG_CODE
from .model import IlpInstance, IlpResult

VERTEX_LIMIT = 5 * 10**7


def halve_upper_bounds(u: Sequence[int]) -> tuple[int, ...]:
    """``floor((u - 1) / 2)`` per entry, clamped at zero."""
    if any(x < 0 for x in u):
        raise PreconditionViolated(f"upper bounds must be non-negative, got {tuple(u)}")
    return tuple(max(0, (x - 1) // 2) for x in u)


def halving_chain(u: Sequence[int]) -> list[tuple[int, ...]]:
    """``u^(0) = u, u^(1), ..., u^(k)`` where ``u^(k)`` is the first all-zero vector."""
    chain = [tuple(int(x) for x in u)]
    while any(chain[-1]):
        chain.append(halve_upper_bounds(chain[-1]))
    return chain


@dataclass(frozen=True)
class DecompositionCheck:
    """The three guarantees of one halving step, each evaluated exactly."""

    rhs_close: bool  # |2 A x' - b|_inf <= 2 n Delta
    within_halved: bool  # 0 <= x' <= u'
    remainder_ok: bool  # 0 <= x - 2x' <= u - 2u' <= 2

    @property
    def ok(self) -> bool:
        return self.rhs_close and self.within_halved and self.remainder_ok


def _delta(A) -> int:
    return max((abs(v) for row in A for v in row), default=0)


def _matvec(A, x) -> tuple[int, ...]:
    return tuple(sum(a * xi for a, xi in zip(row, x)) for row in A)


def decompose_solution(
    x: Sequence[int], u: Sequence[int], A: Sequence[Sequence[int]] = ()
) -> tuple[tuple[int, ...], DecompositionCheck]:
    """Halve a solution ``0 <= x <= u`` of ``A x = b`` (``b`` is taken as ``A x``)."""
    x, u = tuple(int(v) for v in x), tuple(int(v) for v in u)
    if len(x) != len(u) or any(not 0 <= xi <= ui for xi, ui in zip(x, u)):
        raise PreconditionViolated(f"need 0 <= x <= u, got x={x}, u={u}")
    half = []
    for xi, ui in zip(x, u):
        if xi == 0:
            half.append(0)
        elif ui % 2 == 1:
            half.append(xi // 2)
        else:
            half.append((xi - 1) // 2)
    half = tuple(half)
    uh = halve_upper_bounds(u)
    n = len(x)
    b = _matvec(A, x)
    bound = 2 * n * _delta(A)
    rhs_close = all(abs(2 * v - bi) <= bound for v, bi in zip(_matvec(A, half), b))
    within = all(0 <= h <= m for h, m in zip(half, uh))
    rem = all(0 <= xi - 2 * h <= ui - 2 * m <= 2 for xi, h, ui, m in zip(x, half, u, uh))
    return half, DecompositionCheck(rhs_close, within, rem)


def iterate_decomposition(
    x: Sequence[int], u: Sequence[int], A: Sequence[Sequence[int]]
) -> list[tuple[int, ...]]:
    """``x^(0) = x, x^(1), ..., x^(k)``, halving along :func:`halving_chain`."""
    chain = halving_chain(u)
    xs = [tuple(int(v) for v in x)]
    for uj in chain[:-1]:
        nxt, _ = decompose_solution(xs[-1], uj, A)
        xs.append(nxt)
    return xs


def scaled_distance(A, x, b, j: int) -> Fraction:
    """``|A x - b / 2^j|_inf`` as an exact rational."""
    scale = Fraction(1, 2**j)
    return max((abs(Fraction(v) - bi * scale) for v, bi in zip(_matvec(A, x), b)), default=Fraction(0))


# -- the layered graph -----------------------------------------------------------


@dataclass
class Layer:
    """Dense block of vertices ``(b', j, i)`` with ``lo <= b' <= hi``."""

    j: int
    i: int
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    dist: np.ndarray = field(repr=False, default=None)
    choice: Optional[np.ndarray] = field(repr=False, default=None)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(max(0, h - l + 1) for l, h in zip(self.lo, self.hi))

    @property
    def vertices(self) -> int:
        return math.prod(self.shape)

    def index(self, point: Sequence[int]) -> Optional[tuple[int, ...]]:
        if all(l <= p <= h for l, p, h in zip(self.lo, point, self.hi)):
            return tuple(p - l for p, l in zip(point, self.lo))
        return None


@dataclass
class HalvingGraph:
    levels: int = 0
    vertices: int = 0
    edges: int = 0
    layers: dict[tuple[int, int], Layer] = field(default_factory=dict, repr=False)

    def vertex_bound(self, n: int, delta: int, d: int) -> int:
        """Box volume of the widest layer times the number of layers, ``(n + 1) k``."""
        return (4 * (2 * n) * delta + 1) ** d * (n + 1) * self.levels


def _box(b: Sequence[int], j: int, radius: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Integer points within ``radius`` of ``b / 2^j``, computed without rounding error."""
    s = 2**j
    lo = tuple(-((radius * s - bi) // s) for bi in b)  # ceil((b - radius 2^j) / 2^j)
    hi = tuple((bi + radius * s) // s for bi in b)
    return lo, hi


def _shift_slices(src: Layer, dst: Layer, offset: Sequence[int]):
    """Slices pairing ``src`` cell ``p`` with ``dst`` cell ``p + offset`` where both exist."""
    s_sl, d_sl = [], []
    for sl, sh, dl, dh, o in zip(src.lo, src.hi, dst.lo, dst.hi, offset):
        a = max(sl, dl - o)
        z = min(sh, dh - o)
        if a > z:
            return None
        s_sl.append(slice(a - sl, z - sl + 1))
        d_sl.append(slice(a + o - dl, z + o - dl + 1))
    return tuple(s_sl), tuple(d_sl)


def _double_slices(src: Layer, dst: Layer):
    """Slices pairing ``src`` cell ``p`` with ``dst`` cell ``2p``."""
    s_sl, d_sl = [], []
    for sl, sh, dl, dh in zip(src.lo, src.hi, dst.lo, dst.hi):
        a = max(sl, -((-dl) // 2))
        z = min(sh, dh // 2)
        if a > z:
            return None
        s_sl.append(slice(a - sl, z - sl + 1))
        d_sl.append(slice(2 * a - dl, 2 * z - dl + 1, 2))
    return tuple(s_sl), tuple(d_sl)


def solve_divide_conquer(inst: IlpInstance, graph: Optional[HalvingGraph] = None) -> IlpResult:
    graph = graph if graph is not None else HalvingGraph()
    norm = inst.normalized()
    n, d = norm.n, norm.d
    chain = halving_chain(norm.upper)
    k = len(chain) - 1
    graph.levels = k
    if k == 0:
        return IlpResult.optimal(inst, inst.lift([0] * n)) if not any(norm.b) else IlpResult.infeasible()
    delta = norm.delta
    b = norm.b
    cols = [norm.column(i) for i in range(n)]
    profit_cap = sum(abs(c) * u for c, u in zip(norm.c, norm.upper))
    if profit_cap > FINITE_MAX // 2:
        raise ArithmeticOverflow("path values may overflow 64 bits")

    boxes = {}
    for j in range(k):
        for i in range(n + 1):
            boxes[(j, i)] = _box(b, j, 2 * (2 * n - i) * delta)
    total = sum(math.prod(max(0, h - l + 1) for l, h in zip(*bx)) for bx in boxes.values())
    if total > VERTEX_LIMIT:
        raise InstanceTooLarge(f"halving graph would have {total} vertices")

    prev: Optional[Layer] = None
    for j in range(k - 1, -1, -1):
        start = Layer(j, 0, *boxes[(j, 0)])
        start.dist = np.full(start.shape, NEG_CODE, dtype=np.int64)
        if j == k - 1:
            at = start.index((0,) * d)
            if at is not None:
                start.dist[at] = 0
        elif start.vertices and prev.vertices:
            pair = _double_slices(prev, start)
            if pair is not None:
                src = prev.dist[pair[0]]
                start.dist[pair[1]] = np.where(src != NEG_CODE, 2 * src, NEG_CODE)
                graph.edges += int(src.size)
        graph.layers[(j, 0)] = start
        layer = start
        for i in range(n):
            nxt = Layer(j, i + 1, *boxes[(j, i + 1)])
            nxt.dist = np.full(nxt.shape, NEG_CODE, dtype=np.int64)
            nxt.choice = np.full(nxt.shape, -1, dtype=np.int8)
            reps = chain[j][i] - 2 * chain[j + 1][i]
            for x in range(reps + 1):
                pair = _shift_slices(layer, nxt, [x * a for a in cols[i]]) if nxt.vertices else None
                if pair is None:
                    continue
                src = layer.dist[pair[0]]
                cand = np.where(src != NEG_CODE, src + x * norm.c[i], NEG_CODE)
                view, cview = nxt.dist[pair[1] + (Ellipsis,)], nxt.choice[pair[1] + (Ellipsis,)]
                better = cand > view
                view[better] = cand[better]
                cview[better] = x
                graph.edges += int(src.size)
            graph.layers[(j, i + 1)] = nxt
            layer = nxt
        prev = layer
    graph.vertices = sum(layer.vertices for layer in graph.layers.values())

    last = graph.layers[(0, n)]
    at = last.index(b)
    if at is None or last.dist[at] == NEG_CODE:
        return IlpResult.infeasible()

    # backtrack: remainders per level, then x = sum_j 2^j r^(j)
    point = tuple(b)
    x = [0] * n
    for j in range(k):
        for i in range(n, 0, -1):
            layer = graph.layers[(j, i)]
            r = int(layer.choice[layer.index(point)])
            x[i - 1] += (2**j) * r
            point = tuple(p - r * a for p, a in zip(point, cols[i - 1]))
        if j < k - 1:
            if any(p % 2 for p in point):
                raise AssertionError("doubling edge reached an odd right-hand side")
            point = tuple(p // 2 for p in point)
    if any(point):
        raise AssertionError("backtracking did not end at the source")
    result = IlpResult.optimal(inst, inst.lift(x))
    if result.value - norm_offset(inst) != int(last.dist[at]):
        raise AssertionError("witness value disagrees with the longest path")
    return result


def norm_offset(inst: IlpInstance) -> int:
    """Profit of the lower-bound vector, removed by normalization."""
    return sum(c * l for c, l in zip(inst.c, inst.lower))
