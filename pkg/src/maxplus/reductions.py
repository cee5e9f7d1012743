"""Constructive reductions between convolution, superadditivity and knapsack problems.

The chain implemented here:

* unbounded/bounded knapsack -> 0/1 knapsack (binary splitting of multiplicities)
* superadditivity -> unbounded knapsack (primal/dual items, after :func:`monotonize`)
* upper-bound test -> superadditivity (four-block array)
* convolution -> upper-bound oracle (parallel binary search over chunk pairs)
* 0/1 knapsack -> convolution (layers + color coding, randomized)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ArithmeticOverflow, ShapeError, UnboundedProfit
from .knapsack import (
    Item,
    KnapsackInstance,
    Semantics,
    SolutionArray,
    Variant,
    solve_exact_eq,
    to_at_most,
)
from .maxconv import UpperBoundOracle, conv_naive
from .mdarray import FINITE_MAX, NEG_CODE, MDArray, check_finite

Rng = np.random.Generator
RngLike = Union[Rng, int, None]


def make_rng(rng: RngLike) -> Rng:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _require_finite(*arrays: MDArray) -> None:
    for X in arrays:
        if not X.finite_mask.all():
            raise ValueError("this reduction needs arrays without NEG_INF entries")


def _max_abs(*arrays: MDArray) -> int:
    vals = [int(np.abs(X.finite_values()).max()) for X in arrays if X.finite_values().size]
    return max(vals, default=0)


# -- knapsack variants ----------------------------------------------------------


def _binary_pieces(b: int) -> list[int]:
    pieces, p = [], 1
    while b >= p:
        pieces.append(p)
        b -= p
        p *= 2
    if b:
        pieces.append(b)
    return pieces


def bounded_to_zero_one(inst: KnapsackInstance) -> KnapsackInstance:
    """Replace every multi-copy item by power-of-two bundles.

    Unbounded items get bundles ``2^j`` for every ``j`` with ``2^j w <= t``;
    bounded items get the binary decomposition of their (fit-clamped) bound.
    Any multiplicity that fits can be written as a sum of distinct bundles.
    """
    t = inst.capacity
    out: list[Item] = []
    for it in inst.items:
        if it.bound is None and not it.is_zero:
            j = 0
            while all((2**j) * w <= ti for w, ti in zip(it.weight, t)):
                out.append(Item(tuple((2**j) * w for w in it.weight), check_finite((2**j) * it.profit), 1))
                j += 1
            continue
        if it.bound is None:
            if it.profit > 0:
                raise UnboundedProfit(f"zero-weight unbounded item {it}")
            continue
        for piece in _binary_pieces(it.effective_bound(t)):
            out.append(Item(tuple(piece * w for w in it.weight), check_finite(piece * it.profit), 1))
    return KnapsackInstance(out, t, Variant.ZERO_ONE)


# -- superadditivity -> unbounded knapsack ---------------------------------------


def _l1_grid(size: Sequence[int]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(x, dtype=np.int64) for x in size], indexing="ij")
    return sum(grids)


def monotonize(A: MDArray) -> MDArray:
    """Non-negative, monotone increasing array with the same superadditivity verdict.

    ``A'_0 = max(0, A_0)`` and ``A'_v = A_v + c * |v|_1`` otherwise, with
    ``c = 2 max|A| + 1``. The verdict is only preserved when ``A_0 <= 0``;
    callers deciding superadditivity should reject ``A_0 > 0`` first (see
    :func:`decide_superadditive`).
    """
    _require_finite(A)
    c = 2 * _max_abs(A) + 1
    l1 = _l1_grid(A.size)
    top = _max_abs(A) + c * int(l1.max())
    if top > FINITE_MAX:
        raise ArithmeticOverflow("monotonized entries overflow 64 bits")
    nd = A.nd + c * l1
    origin = (0,) * A.d
    nd[origin] = max(0, int(A.nd[origin]))
    return MDArray.from_ndarray(nd)


@dataclass(frozen=True)
class PrimalDualInstance:
    """Unbounded knapsack whose optimum at capacity ``2L`` equals ``threshold`` iff the source is superadditive."""

    instance: KnapsackInstance
    threshold: int
    source_size: tuple[int, ...]


def superadd_to_knapsack(A: MDArray) -> PrimalDualInstance:
    """Primal item ``(v, A_v)`` per nonzero ``v``, dual item ``(2L - v, thr - A_v)`` per ``v``.

    ``thr = 2 |L|_1 max(A) + 1``: capacity ``2L`` admits up to ``2|L|_1``
    primal items, so a primal-only packing can never reach ``thr``.
    """
    _require_finite(A)
    if np.any(A.nd < 0):
        raise ValueError("superadd_to_knapsack needs a non-negative array; monotonize first")
    L = A.size
    t = tuple(2 * x for x in L)
    amax = int(A.nd.max())
    threshold = check_finite(2 * sum(L) * amax + 1)
    items = []
    for v in itertools.product(*[range(x) for x in L]):
        a = int(A.nd[v])
        if any(v):
            items.append(Item(v, a, None))
        items.append(Item(tuple(ti - vi for ti, vi in zip(t, v)), threshold - a, None))
    return PrimalDualInstance(KnapsackInstance(items, t, Variant.UNBOUNDED), threshold, L)


def decide_superadditive(
    A: MDArray, solver: Callable[[KnapsackInstance], SolutionArray] = solve_exact_eq
) -> bool:
    """Superadditivity decided through monotonize + primal/dual knapsack + ``solver``."""
    _require_finite(A)
    if int(A.nd[(0,) * A.d]) > 0:
        return False
    pd = superadd_to_knapsack(monotonize(A))
    return pd_verdict(pd, solver(pd.instance))


def pd_verdict(pd: PrimalDualInstance, sol: SolutionArray) -> bool:
    best = sol.best()
    if best < pd.threshold:
        raise AssertionError(f"knapsack optimum {best} below the always-reachable threshold {pd.threshold}")
    return best == pd.threshold


# -- upper bound -> superadditivity --------------------------------------------------


def upperbound_to_superadd(A: MDArray, B: MDArray, C: MDArray) -> MDArray:
    """Four blocks along dimension 1: ``[0 / -10K | K+A | 4K+B | 5K+C]``.

    ``M`` is superadditive iff ``(A (+) B) <= C``; every other block pairing
    is forced to satisfy superadditivity by the offsets.
    """
    if not (A.size == B.size == C.size):
        raise ShapeError(f"sizes differ: {A.size}, {B.size}, {C.size}")
    _require_finite(A, B, C)
    L = A.size
    K = 1 + 2 * _max_abs(A, B, C)
    if 10 * K + _max_abs(A, B, C) > FINITE_MAX:
        raise ArithmeticOverflow("block array entries overflow 64 bits")
    L1 = L[0]
    nd = np.full((4 * L1,) + L[1:], -10 * K, dtype=np.int64, order="F")
    nd[(0,) * len(L)] = 0
    nd[L1 : 2 * L1] = A.nd + K
    nd[2 * L1 : 3 * L1] = B.nd + 4 * K
    nd[3 * L1 : 4 * L1] = C.nd + 5 * K
    return MDArray.from_ndarray(nd)


# -- convolution from an upper-bound oracle -----------------------------------------


def _prefix(X: np.ndarray, axis: int, m: int) -> np.ndarray:
    sl = [slice(None)] * X.ndim
    sl[axis] = slice(0, m)
    return X[tuple(sl)]


def find_violating_position(
    A: MDArray, B: MDArray, C: MDArray, oracle: UpperBoundOracle
) -> Optional[tuple[int, ...]]:
    """Some ``v`` with ``C_v < (A (+) B)_v``, or None when the oracle accepts.

    One binary search per dimension over prefix lengths (a prefix along axis
    ``i`` contains every pair summing into it). After fixing ``u_i``, every
    ``C_p`` with ``p_i != u_i`` is raised to a sentinel in a working copy so
    later searches only see violations on the fixed slice.
    """
    if not (A.size == B.size == C.size):
        raise ShapeError(f"sizes differ: {A.size}, {B.size}, {C.size}")
    if oracle(A, B, C):
        return None
    L = A.size
    big = 1 + 2 * (_max_abs(A) + _max_abs(B))
    check_finite(big)
    Cw = C.to_ndarray()
    An, Bn = A.nd, B.nd
    found = []
    for axis in range(len(L)):
        lo, hi = 1, L[axis]
        while lo < hi:
            mid = (lo + hi) // 2
            ok = oracle(
                MDArray.from_ndarray(_prefix(An, axis, mid)),
                MDArray.from_ndarray(_prefix(Bn, axis, mid)),
                MDArray.from_ndarray(_prefix(Cw, axis, mid)),
            )
            if ok:
                lo = mid + 1
            else:
                hi = mid
        u = hi - 1
        found.append(u)
        sl = [slice(None)] * len(L)
        keep = Cw.take(u, axis=axis).copy()
        Cw[...] = big
        sl[axis] = u
        Cw[tuple(sl)] = keep
    return tuple(found)


@dataclass
class OracleStats:
    rounds: int = 0
    chunk_tests: int = 0
    oracle_calls: int = 0
    violations: int = 0


def _counting(oracle: UpperBoundOracle, stats: OracleStats) -> UpperBoundOracle:
    def wrapped(A, B, C):
        stats.oracle_calls += 1
        return oracle(A, B, C)

    return wrapped


def conv_via_upperbound_oracle(
    A: MDArray, B: MDArray, oracle: UpperBoundOracle, stats: Optional[OracleStats] = None
) -> MDArray:
    """Truncated convolution of equal-size arrays using only upper-bound queries.

    Inputs are shifted to be non-negative, then every output position runs a
    binary search over ``[-1, K]`` (``-1`` standing for NEG_INF) in lockstep.
    Each round tests all pairs of chunks (about ``sqrt(len)`` entries each,
    padded to twice the chunk side with ``-K`` dummies) against the current
    guesses and marks every position whose guess is too low.
    """
    if A.size != B.size:
        raise ShapeError(f"sizes differ: {A.size}, {B.size}")
    stats = stats if stats is not None else OracleStats()
    oracle = _counting(oracle, stats)
    L = A.size
    fa, fb = A.finite_values(), B.finite_values()
    if fa.size == 0 or fb.size == 0:
        return MDArray.full(L, None)
    sa, sb = -int(fa.min()), -int(fb.min())
    K = int(fa.max()) + sa + int(fb.max()) + sb
    pad = -(K + 2)
    big = K + 1
    check_finite(2 * K + 4)
    As = np.where(A.finite_mask, A.nd + sa, pad)
    Bs = np.where(B.finite_mask, B.nd + sb, pad)

    side = tuple(math.isqrt(x - 1) + 1 for x in L)  # ceil(sqrt(L_i))
    grid = tuple(-(-x // s) for x, s in zip(L, side))
    chunk_shape = tuple(2 * s for s in side)

    def chunk(X: np.ndarray, alpha) -> np.ndarray:
        out = np.full(chunk_shape, pad, dtype=np.int64)
        src = tuple(slice(a * s, min((a + 1) * s, x)) for a, s, x in zip(alpha, side, L))
        out[tuple(slice(0, sl.stop - sl.start) for sl in src)] = X[src]
        return out

    chunks_a = {alpha: chunk(As, alpha) for alpha in itertools.product(*map(range, grid))}
    chunks_b = {beta: chunk(Bs, beta) for beta in itertools.product(*map(range, grid))}

    lo = np.full(L, -1, dtype=np.int64)
    hi = np.full(L, K, dtype=np.int64)
    while np.any(lo < hi):
        stats.rounds += 1
        guess = np.where(lo < hi, (lo + hi) // 2, hi)
        cur = guess.copy()
        too_low = np.zeros(L, dtype=bool)
        open_ = lo < hi
        for alpha, ca in chunks_a.items():
            for beta, cb in chunks_b.items():
                base = tuple((a + b) * s for a, b, s in zip(alpha, beta, side))
                if any(x >= l for x, l in zip(base, L)):
                    continue
                region = tuple(slice(x, min(x + 2 * s, l)) for x, s, l in zip(base, side, L))
                if not open_[region].any():
                    continue
                stats.chunk_tests += 1
                local = tuple(slice(0, r.stop - r.start) for r in region)
                cc = np.full(chunk_shape, big, dtype=np.int64)
                cc[local] = cur[region]
                Am, Bm = MDArray.from_ndarray(ca), MDArray.from_ndarray(cb)
                while True:
                    v = find_violating_position(Am, Bm, MDArray.from_ndarray(cc), oracle)
                    if v is None:
                        break
                    stats.violations += 1
                    g = tuple(x + y for x, y in zip(base, v))
                    too_low[g] = True
                    cur[g] = big
                    cc[v] = big
        lo = np.where(open_ & too_low, guess + 1, lo)
        hi = np.where(open_ & ~too_low, guess, hi)
    out = np.where(hi >= 0, hi - sa - sb, NEG_CODE)
    return MDArray.from_ndarray(out)


# -- 0/1 knapsack -> convolution (color coding) --------------------------------


def _exact_array(items: Sequence[Item], size: tuple[int, ...]) -> MDArray:
    nd = MDArray.unit(size).to_ndarray()
    for it in items:
        if all(w < s for w, s in zip(it.weight, size)):
            nd[it.weight] = max(int(nd[it.weight]), it.profit)
    return MDArray(size, nd)


def _conv_all(arrays: Sequence[MDArray], size: tuple[int, ...]) -> MDArray:
    acc = MDArray.unit(size)
    for Z in arrays:
        acc = conv_naive(acc, Z, size)
    return acc


def color_coding(
    items: Sequence[Item], t: Sequence[int], k: int, delta: float, rng: RngLike
) -> SolutionArray:
    """Randomized at-most-weight table that is exact for every packing of at most ``k`` items w.p. ``1 - delta``.

    Each of ``ceil(log_{4/3}(1/delta))`` rounds throws the items into ``k^2``
    buckets, keeps the best profit per exact weight in each bucket, and
    convolves the buckets. Every finite entry is realised by items from
    distinct buckets, so the table never exceeds the true optimum.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    rng = make_rng(rng)
    size = tuple(int(x) + 1 for x in t)
    rounds = math.ceil(math.log(1 / delta) / math.log(4 / 3))
    S = np.full(size, NEG_CODE, dtype=np.int64, order="F")
    for _ in range(rounds):
        colors = rng.integers(0, k * k, size=len(items))
        buckets: dict[int, list[Item]] = {}
        for it, c in zip(items, colors.tolist()):
            buckets.setdefault(c, []).append(it)
        P = _conv_all([_exact_array(b, size) for _, b in sorted(buckets.items())], size)
        np.maximum(S, P.nd, out=S)
    return to_at_most(SolutionArray(MDArray(size, S)))


def _next_pow2(x: float) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


def solve_layer(
    layer_items: Sequence[Item], t: Sequence[int], j: int, delta: float, rng: RngLike
) -> SolutionArray:
    """At-most table for one layer, where any packing uses at most ``2^(j-1)`` layer items.

    Small layers fall back to color coding with ``k = 2^j``. Otherwise the
    items are split into ``m`` random groups, each color-coded with the
    reduced capacity ``ceil(2 gamma t / l)`` and ``k = ceil(gamma)``, and the
    groups are merged by a balanced tree of truncated convolutions.
    """
    rng = make_rng(rng)
    t = tuple(int(x) for x in t)
    size = tuple(x + 1 for x in t)
    if not layer_items:
        return SolutionArray(MDArray.full(size, 0), Semantics.AT_MOST_WEIGHT)
    l = 2**j
    lg = math.log2(l / delta)
    if l < lg:
        return color_coding(layer_items, t, l, delta, rng)
    gamma = 6 * lg
    m = _next_pow2(l / lg)
    cap = tuple(min(ti, math.ceil(2 * gamma * ti / l)) for ti in t)
    groups = rng.integers(0, m, size=len(layer_items))
    parts: list[MDArray] = []
    for g in range(m):
        members = [it for it, gi in zip(layer_items, groups.tolist()) if gi == g]
        parts.append(color_coding(members, cap, math.ceil(gamma), delta / l, rng).array)
    while len(parts) > 1:
        merged = []
        for a, b in zip(parts[0::2], parts[1::2]):
            out = tuple(min(s, x + y - 1) for s, x, y in zip(size, a.size, b.size))
            merged.append(conv_naive(a, b, out))
        parts = merged
    top = parts[0]
    if top.size != size:
        raise AssertionError(f"layer tree reached {top.size}, expected {size}")
    return SolutionArray(top, Semantics.AT_MOST_WEIGHT)


@dataclass
class LayerPartition:
    layers: dict[tuple[int, int], list[Item]] = field(default_factory=dict)
    levels: int = 1
    dropped: list[Item] = field(default_factory=list)

    def items(self) -> list[Item]:
        return [it for layer in self.layers.values() for it in layer]


def _level(w: int, ti: int, levels: int) -> int:
    if w == 0:
        return levels
    j = 1
    while j < levels and w * 2**j <= ti:
        j += 1
    return j


def partition_layers(items: Sequence[Item], t: Sequence[int]) -> LayerPartition:
    """Assign each fitting item to the layer ``(i, j)`` with minimal ``j`` (ties: smallest ``i``).

    Dimensions and levels are 1-based. Layer ``(i, j)`` holds items with
    ``w_i`` in ``(t_i / 2^j, t_i / 2^(j-1)]``; the last level ``ceil(log2 n)``
    takes everything at or below ``t_i / 2^(levels-1)``.
    """
    n = len(items)
    levels = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    part = LayerPartition(levels=levels)
    for it in items:
        if any(w > ti for w, ti in zip(it.weight, t)):
            part.dropped.append(it)
            continue
        js = [_level(w, ti, levels) for w, ti in zip(it.weight, t)]
        j = min(js)
        i = js.index(j) + 1
        part.layers.setdefault((i, j), []).append(it)
    return part


def knapsack_via_conv(inst: KnapsackInstance, delta: float, rng: RngLike) -> SolutionArray:
    """0/1 knapsack at-most table via layers, color coding and truncated convolution.

    Each layer is solved with failure budget ``delta / levels``; the table is
    exact at every capacity with probability at least ``1 - delta`` and never
    exceeds the optimum.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if any(it.bound != 1 for it in inst.items):
        raise ValueError("knapsack_via_conv expects a 0/1 instance; use bounded_to_zero_one")
    rng = make_rng(rng)
    size = inst.array_size
    offset = sum(max(0, it.profit) for it in inst.items if it.is_zero)
    part = partition_layers([it for it in inst.items if not it.is_zero], inst.capacity)
    sub_delta = delta / part.levels
    acc = MDArray.full(size, 0)
    for (i, j) in sorted(part.layers):
        W = solve_layer(part.layers[(i, j)], inst.capacity, j, sub_delta, rng)
        acc = conv_naive(acc, W.array, size)
    if offset:
        if int(acc.nd.max()) + offset > FINITE_MAX:
            raise ArithmeticOverflow("zero-weight offset overflows 64 bits")
        acc = MDArray.from_ndarray(acc.nd + offset)
    return SolutionArray(acc, Semantics.AT_MOST_WEIGHT)


__all__ = [
    "LayerPartition",
    "OracleStats",
    "PrimalDualInstance",
    "bounded_to_zero_one",
    "color_coding",
    "conv_via_upperbound_oracle",
    "decide_superadditive",
    "find_violating_position",
    "knapsack_via_conv",
    "make_rng",
    "monotonize",
    "partition_layers",
    "pd_verdict",
    "solve_layer",
    "superadd_to_knapsack",
    "upperbound_to_superadd",
]
