"""Multidimensional knapsack: instance model, oracles and the weight-class solver.

Every solver returns an *exact-weight* solution array of size ``t + 1``:
entry ``v`` is the best profit of a packing of total weight exactly ``v``
(NEG_INF when no packing hits ``v``). :func:`to_at_most` turns that into
the usual "weight at most ``v``" table.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InstanceTooLarge, ShapeError, UnboundedProfit
from .maxconv import concave_maxconv
from .mdarray import FINITE_MAX, FINITE_MIN, NEG_CODE, MDArray, check_finite, num_entries, strides

BRUTE_FORCE_LIMIT = 10**7
BELLMAN_BUDGET = 5 * 10**8


class Variant(str, enum.Enum):
    ZERO_ONE = "zero_one"
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    EXACT_EQ = "exact_eq"


class Semantics(str, enum.Enum):
    EXACT_WEIGHT = "exact"
    AT_MOST_WEIGHT = "atmost"


@dataclass(frozen=True)
class Item:
    """One item type; ``bound=None`` means it may be taken any number of times."""

    weight: tuple[int, ...]
    profit: int
    bound: Optional[int] = 1

    def __post_init__(self):
        object.__setattr__(self, "weight", tuple(int(x) for x in self.weight))
        object.__setattr__(self, "profit", check_finite(int(self.profit)))
        if any(x < 0 for x in self.weight):
            raise ValueError(f"negative weight component in {self.weight}")
        if self.bound is not None:
            if int(self.bound) < 1:
                raise ValueError(f"item bound must be positive, got {self.bound}")
            object.__setattr__(self, "bound", int(self.bound))

    @property
    def is_zero(self) -> bool:
        return not any(self.weight)

    def fit_count(self, t: Sequence[int]) -> Optional[int]:
        """How many copies fit into ``t`` by weight alone (None for weight 0)."""
        counts = [ti // wi for wi, ti in zip(self.weight, t) if wi > 0]
        return min(counts) if counts else None

    def effective_bound(self, t: Sequence[int]) -> int:
        """Multiplicity bound clamped to the fit count. Raises for zero weight + unbounded."""
        fit = self.fit_count(t)
        if fit is None:
            if self.bound is None:
                if self.profit > 0:
                    raise UnboundedProfit(f"zero-weight unbounded item {self}")
                return 0
            return self.bound
        return fit if self.bound is None else min(self.bound, fit)


@dataclass(frozen=True)
class KnapsackInstance:
    items: tuple[Item, ...]
    capacity: tuple[int, ...]
    variant: Variant = Variant.BOUNDED

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "capacity", tuple(int(x) for x in self.capacity))
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.capacity or any(x < 0 for x in self.capacity):
            raise ShapeError(f"capacity must be a non-empty non-negative vector, got {self.capacity}")
        d = len(self.capacity)
        for it in self.items:
            if len(it.weight) != d:
                raise ShapeError(f"item weight {it.weight} does not have dimension {d}")
        if self.variant is Variant.ZERO_ONE and any(it.bound != 1 for it in self.items):
            raise ValueError("0/1 instances need every bound equal to 1")
        if self.variant is Variant.UNBOUNDED and any(it.bound is not None for it in self.items):
            raise ValueError("unbounded instances need every bound to be None")

    @property
    def d(self) -> int:
        return len(self.capacity)

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def array_size(self) -> tuple[int, ...]:
        return tuple(x + 1 for x in self.capacity)

    @property
    def delta(self) -> int:
        return max((max(it.weight) for it in self.items), default=0)

    def distinct_weights(self) -> list[tuple[int, ...]]:
        return sorted({it.weight for it in self.items})

    def total_multiplicity(self) -> int:
        return sum(it.effective_bound(self.capacity) for it in self.items if not it.is_zero)


@dataclass(frozen=True)
class SolutionArray:
    array: MDArray
    semantics: Semantics = Semantics.EXACT_WEIGHT

    def __post_init__(self):
        object.__setattr__(self, "semantics", Semantics(self.semantics))

    def best(self):
        """Knapsack optimum: the at-most value at full capacity."""
        at_most = to_at_most(self).array
        return at_most[tuple(x - 1 for x in at_most.size)]


def _zero_weight_offset(items: Iterable[Item]) -> int:
    """Profit of greedily taking every positive zero-weight item as often as allowed."""
    total = 0
    for it in items:
        if it.profit > 0:
            if it.bound is None:
                raise UnboundedProfit(f"zero-weight unbounded item with profit {it.profit}")
            total += it.profit * it.bound
    return check_finite(total)


def _add_offset(arr: np.ndarray, offset: int) -> np.ndarray:
    if offset == 0:
        return arr
    fin = arr != NEG_CODE
    if fin.any() and int(arr[fin].max()) + offset > FINITE_MAX:
        raise ArithmeticError("offset overflows 64 bits")
    return np.where(fin, arr + offset, NEG_CODE)


# -- oracles -----------------------------------------------------------------


def brute_force(inst: KnapsackInstance, limit: int = BRUTE_FORCE_LIMIT) -> SolutionArray:
    """Enumerate every multiplicity vector; exact-weight optimum per position.

    Unbounded multiplicities are truncated to how many copies fit. Raises
    InstanceTooLarge when the product of ``bound + 1`` exceeds ``limit``.
    """
    t = inst.capacity
    bounds = [it.effective_bound(t) for it in inst.items]
    space = 1
    for b in bounds:
        space *= b + 1
    if space > limit:
        raise InstanceTooLarge(f"{space} multiplicity vectors exceed the brute-force limit {limit}")
    best: dict[tuple[int, ...], int] = {}
    items = inst.items
    d = inst.d

    def rec(i: int, w: list[int], p: int) -> None:
        if i == len(items):
            key = tuple(w)
            if key not in best or p > best[key]:
                best[key] = p
            return
        it = items[i]
        w2 = list(w)
        p2 = p
        for x in range(bounds[i] + 1):
            if x:
                for k in range(d):
                    w2[k] += it.weight[k]
                p2 += it.profit
                if any(w2[k] > t[k] for k in range(d)):
                    break
            rec(i + 1, w2, p2)

    rec(0, [0] * d, 0)
    nd = np.full(inst.array_size, NEG_CODE, dtype=np.int64, order="F")
    for v, p in best.items():
        nd[v] = check_finite(p)
    return SolutionArray(MDArray(inst.array_size, nd))


def _shifted_add(R: np.ndarray, w: Sequence[int], p: int) -> np.ndarray:
    """Array whose entry ``v`` is ``R[v - w] + p`` (NEG_INF where ``v - w`` is invalid)."""
    out = np.full(R.shape, NEG_CODE, dtype=np.int64, order="F")
    if any(wi > s - 1 for wi, s in zip(w, R.shape)):
        return out
    src = tuple(slice(0, s - wi) for wi, s in zip(w, R.shape))
    dst = tuple(slice(wi, s) for wi, s in zip(w, R.shape))
    block = R[src]
    out[dst] = np.where(block != NEG_CODE, block + p, NEG_CODE)
    return out


def bellman_dp(inst: KnapsackInstance, budget: int = BELLMAN_BUDGET) -> SolutionArray:
    """Textbook DP that processes every copy of every item as a separate 0/1 item."""
    t = inst.capacity
    copies = [(it, it.effective_bound(t)) for it in inst.items]
    work = num_entries(inst.array_size) * max(1, sum(b for _, b in copies))
    if work > budget:
        raise InstanceTooLarge(f"bellman work {work} exceeds budget {budget}")
    R = MDArray.unit(inst.array_size).to_ndarray()
    fin_hi = sum(max(it.profit, 0) * b for it, b in copies)
    fin_lo = sum(min(it.profit, 0) * b for it, b in copies)
    if fin_hi > FINITE_MAX or fin_lo < FINITE_MIN:
        raise ArithmeticError("profits may overflow 64 bits")
    for it, b in copies:
        for _ in range(b):
            np.maximum(R, _shifted_add(R, it.weight, it.profit), out=R)
    return SolutionArray(MDArray(inst.array_size, R))


# -- the weight-class solver --------------------------------------------------


def profit_sequence(items: Sequence[Item], k_max: int) -> list[int]:
    """Best profit of taking exactly ``k`` copies from one weight class, ``k = 0..k_max``.

    Sorted prefix sums of the profits (each repeated ``bound`` times), so the
    sequence is concave with value 0 at ``k = 0``. ``k_max`` is clamped to the
    total multiplicity; unbounded items are treated as having ``k_max`` copies.
    """
    ranked = sorted(items, key=lambda it: it.profit, reverse=True)
    f = [0]
    for it in ranked:
        mult = k_max if it.bound is None else it.bound
        for _ in range(mult):
            if len(f) > k_max:
                return f
            f.append(f[-1] + it.profit)
    return f


@dataclass
class ClassStats:
    """Bookkeeping from :func:`solve_exact_eq`, used by tests and benchmarks."""

    classes: int = 0
    visited_per_weight: list[int] = field(default_factory=list)


def solve_exact_eq(inst: KnapsackInstance, stats: Optional[ClassStats] = None) -> SolutionArray:
    """Exact-weight optimum for every capacity, one concave convolution per class chain.

    For each distinct weight ``w`` the positions split into chains
    ``v', v' + w, v' + 2w, ...`` starting at a representative ``v'`` with
    some ``v'_i < w_i``. Along a chain the update is a 1-D convolution of the
    previous values with the class's concave profit sequence.
    """
    t = inst.capacity
    size = inst.array_size
    d = inst.d
    offset = _zero_weight_offset(it for it in inst.items if it.is_zero)
    classes: dict[tuple[int, ...], list[Item]] = defaultdict(list)
    for it in inst.items:
        if not it.is_zero and it.fit_count(t) > 0:
            classes[it.weight].append(it)

    st = strides(size)
    total = num_entries(size)
    R = [None] * total
    R[0] = 0
    grids = np.meshgrid(*[np.arange(s) for s in size], indexing="ij")
    flat_coords = [g.reshape(-1, order="F") for g in grids]

    for w in sorted(classes):
        group = classes[w]
        step = sum(wi * si for wi, si in zip(w, st))
        longest = min(ti // wi for wi, ti in zip(w, t) if wi > 0)
        f = profit_sequence(group, longest)
        # representative v' has v'_i < w_i in some dimension with w_i > 0
        is_rep = np.zeros(total, dtype=bool)
        for i in range(d):
            if w[i] > 0:
                is_rep |= flat_coords[i] < w[i]
        reps = np.flatnonzero(is_rep)
        # chain length from v' is 1 + min_i floor((t_i - v'_i) / w_i)
        room = np.full(reps.size, np.iinfo(np.int64).max, dtype=np.int64)
        for i in range(d):
            if w[i] > 0:
                np.minimum(room, (t[i] - flat_coords[i][reps]) // w[i], out=room)
        new = list(R)
        visited = 0
        for rep, k in zip(reps.tolist(), room.tolist()):
            visited += k + 1
            if k == 0:
                continue
            idx = range(rep, rep + (k + 1) * step, step)
            r = [R[j] for j in idx]
            if all(x is None for x in r):
                continue
            a = f[: k + 1]
            c, _ = concave_maxconv(r, a, k + 1, check=False)
            for j, val in zip(idx, c):
                new[j] = val
        if visited != total:
            raise AssertionError(f"weight class {w} visited {visited} of {total} positions")
        if stats is not None:
            stats.classes += 1
            stats.visited_per_weight.append(visited)
        R = new

    codes = np.fromiter((NEG_CODE if x is None else check_finite(x) for x in R), dtype=np.int64, count=total)
    arr = _add_offset(codes.reshape(size, order="F"), offset)
    return SolutionArray(MDArray(size, np.asfortranarray(arr)))


def to_at_most(sol: SolutionArray) -> SolutionArray:
    """Prefix maximum over ``u <= v``: one running-max sweep per dimension."""
    if sol.semantics is Semantics.AT_MOST_WEIGHT:
        return sol
    nd = sol.array.to_ndarray()
    for axis in range(nd.ndim):
        np.maximum.accumulate(nd, axis=axis, out=nd)
    return SolutionArray(MDArray(sol.array.size, nd), Semantics.AT_MOST_WEIGHT)


def solve(inst: KnapsackInstance, solver: str = "classconv") -> SolutionArray:
    solvers = {"classconv": solve_exact_eq, "bellman": bellman_dp, "brute": brute_force}
    return solvers[solver](inst)
