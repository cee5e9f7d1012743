"""ILP via LP proximity and one concave convolution per distinct column.

Some optimal integer solution lies within l1-distance ``proximity_radius``
of the rounded-down LP optimum. Columns that are identical are merged into
one group whose profit, as a function of the group's total deviation, is
concave. The residual system is then a DP over a box of right-hand sides;
each group is folded in by concave convolutions along the chains
``r, r + a, r + 2a, ...`` of its column ``a``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ..errors import ArithmeticOverflow, InstanceTooLarge
from ..maxconv import check_concave, concave_maxconv
from ..mdarray import FINITE_MAX, NEG_CODE
from .lp import lp_relax
from .model import IlpInstance, IlpResult, Status

BOX_LIMIT = 2 * 10**6
NO_CHOICE = np.iinfo(np.int64).min


def proximity_radius(d: int, delta: int) -> int:
    """``d (2 d delta + 1)^d + d``."""
    if d < 1 or delta < 0:
        raise ValueError(f"need d >= 1 and delta >= 0, got d={d}, delta={delta}")
    L = d * (2 * d * delta + 1) ** d + d
    if L > FINITE_MAX:
        raise ArithmeticOverflow(f"proximity radius {L} overflows 64 bits")
    return L


@dataclass
class ColumnGroup:
    column: tuple[int, ...]
    members: list[int]  # sorted by (profit, index) descending
    low: int = 0  # most negative allowed total deviation
    high: int = 0
    profits: list[int] = field(default_factory=list)  # f(low), ..., f(high)

    def f(self, k: int) -> int:
        return self.profits[k - self.low]


def _group_columns(inst: IlpInstance) -> list[ColumnGroup]:
    groups: dict[tuple[int, ...], list[int]] = {}
    for i in range(inst.n):
        groups.setdefault(inst.column(i), []).append(i)
    out = []
    for col, members in groups.items():
        members.sort(key=lambda i: (inst.c[i], i), reverse=True)
        out.append(ColumnGroup(col, members))
    return out


def _greedy_fill(group: ColumnGroup, total, upper) -> dict[int, Fraction]:
    """Spread ``total`` over the group, most profitable member first."""
    out, rest = {}, total
    for i in group.members:
        take = min(Fraction(upper[i]), rest)
        out[i] = take
        rest -= take
    return out


def _apply_deviation(group: ColumnGroup, base: list[int], k: int, upper) -> dict[int, int]:
    """Member values after moving the group's total by ``k``.

    Increases fill the most profitable members with spare capacity first;
    decreases empty the least profitable picked members first.
    """
    vals = {i: base[i] for i in group.members}
    if k > 0:
        for i in group.members:
            step = min(k, upper[i] - vals[i])
            vals[i] += step
            k -= step
    elif k < 0:
        k = -k
        for i in reversed(group.members):
            step = min(k, vals[i])
            vals[i] -= step
            k -= step
    if k:
        raise AssertionError("deviation exceeds the group's range")
    return vals


def _deviation_profits(group: ColumnGroup, base: list[int], c, upper) -> list[int]:
    out = []
    for k in range(group.low, group.high + 1):
        vals = _apply_deviation(group, base, k, upper)
        out.append(sum(c[i] * (vals[i] - base[i]) for i in group.members))
    return out


@dataclass
class ProximityStats:
    radius: int = 0
    groups: int = 0
    box: tuple[int, ...] = ()
    lp_value: Optional[Fraction] = None


def _fold_group(U: np.ndarray, group: ColumnGroup):
    """One DP step: ``U'[r] = max_k U[r - k a] + f(k)``; also returns the chosen ``k`` per cell."""
    a = group.column
    out = np.full(U.shape, NEG_CODE, dtype=np.int64)
    choice = np.full(U.shape, NO_CHOICE, dtype=np.int64)
    f = group.profits
    if not any(a):
        k = max(range(group.low, group.high + 1), key=lambda k: (group.f(k), -abs(k)))
        fin = U != NEG_CODE
        out[fin] = U[fin] + group.f(k)
        choice[fin] = k
        return out, choice
    shape = U.shape
    for start in itertools.product(*[range(s) for s in shape]):
        prev = tuple(p - ai for p, ai in zip(start, a))
        if all(0 <= p < s for p, s in zip(prev, shape)):
            continue  # not the first cell of its chain
        chain = []
        p = start
        while all(0 <= q < s for q, s in zip(p, shape)):
            chain.append(p)
            p = tuple(q + ai for q, ai in zip(p, a))
        seq = [None if U[q] == NEG_CODE else int(U[q]) for q in chain]
        if all(v is None for v in seq):
            continue
        lo = group.low
        c, arg = concave_maxconv(seq, f, len(chain) - lo, check=False)
        for j, q in enumerate(chain):
            v = c[j - lo]
            if v is not None:
                if v > FINITE_MAX:
                    raise ArithmeticOverflow("DP value overflows 64 bits")
                out[q] = v
                choice[q] = j - arg[j - lo]
    return out, choice


def solve_proximity(inst: IlpInstance, stats: Optional[ProximityStats] = None) -> IlpResult:
    stats = stats if stats is not None else ProximityStats()
    norm = inst.normalized()
    d, n = norm.d, norm.n
    if n == 0:
        return IlpResult.optimal(inst, ()) if not any(norm.b) else IlpResult.infeasible()
    if d == 0:  # no constraints: every variable independently
        return IlpResult.optimal(inst, inst.lift([u if c > 0 else 0 for c, u in zip(norm.c, norm.upper)]))
    lp = lp_relax(norm)
    stats.lp_value = lp.value
    if lp.status is not Status.OPTIMAL:
        return IlpResult.infeasible()

    upper = norm.upper
    groups = _group_columns(norm)
    stats.groups = len(groups)
    base = [0] * n
    for g in groups:
        filled = _greedy_fill(g, sum(lp.x[i] for i in g.members), upper)
        for i, v in filled.items():
            base[i] = math.floor(v)

    L = proximity_radius(d, norm.delta)
    stats.radius = L
    for g in groups:
        g.low = max(-L, -sum(base[i] for i in g.members))
        g.high = min(L, sum(upper[i] - base[i] for i in g.members))
        g.profits = _deviation_profits(g, base, norm.c, upper)
        check_concave(g.profits)

    residual = [bi - si for bi, si in zip(norm.b, norm.row_dot(base))]
    half = tuple(
        min(norm.delta * L, sum(abs(g.column[r]) * max(-g.low, g.high) for g in groups)) for r in range(d)
    )
    stats.box = half
    if any(abs(x) > h for x, h in zip(residual, half)):
        return IlpResult.infeasible()
    cells = math.prod(2 * h + 1 for h in half)
    if cells > BOX_LIMIT:
        raise InstanceTooLarge(f"DP box with {cells} cells is over the limit {BOX_LIMIT}")

    shape = tuple(2 * h + 1 for h in half)
    U = np.full(shape, NEG_CODE, dtype=np.int64)
    U[half] = 0
    choices = []
    for g in groups:
        U, ch = _fold_group(U, g)
        choices.append(ch)
    target = tuple(x + h for x, h in zip(residual, half))
    if U[target] == NEG_CODE:
        return IlpResult.infeasible()

    y = list(base)
    pos = target
    for g, ch in zip(reversed(groups), reversed(choices)):
        k = int(ch[pos])
        vals = _apply_deviation(g, base, k, upper)
        for i, v in vals.items():
            y[i] = v
        pos = tuple(p - k * ai for p, ai in zip(pos, g.column))
    if pos != half:
        raise AssertionError("backtracking did not return to the origin")
    result = IlpResult.optimal(inst, inst.lift(y))
    if result.value - sum(c * l for c, l in zip(inst.c, inst.lower)) != int(U[target]) + norm.value(base):
        raise AssertionError("witness value disagrees with the DP value")
    return result
