"""Exact LP relaxation: two-phase tableau simplex over ``Fraction`` with Bland's rule.

The relaxation of a normalized instance is ``max c.y  s.t.  Ay = b', y + s = u', y, s >= 0``.
Bound rows start with their slack in the basis; only the ``A`` rows need
artificial variables in phase one.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .model import IlpInstance, LpSolution, Status

Row = list[Fraction]


def _pivot(T: list[Row], obj: Row, basis: list[int], r: int, col: int) -> None:
    piv = T[r][col]
    T[r] = [v / piv for v in T[r]]
    pr = T[r]
    for k, row in enumerate(T):
        if k != r and row[col] != 0:
            f = row[col]
            T[k] = [a - f * b for a, b in zip(row, pr)]
    if obj[col] != 0:
        f = obj[col]
        obj[:] = [a - f * b for a, b in zip(obj, pr)]
    basis[r] = col


def _run(T: list[Row], obj: Row, basis: list[int], allowed: list[bool]) -> bool:
    """Maximize; ``obj`` holds reduced costs ``c_j - z_j`` and ``-value`` in the last slot.

    Returns False if the objective is unbounded. Bland's rule: lowest-index
    improving column enters, lowest-index basic variable leaves on ties.
    """
    ncols = len(obj) - 1
    while True:
        col = next((j for j in range(ncols) if allowed[j] and obj[j] > 0), None)
        if col is None:
            return True
        best: Optional[tuple[Fraction, int, int]] = None
        for r, row in enumerate(T):
            if row[col] > 0:
                key = (row[-1] / row[col], basis[r], r)
                if best is None or key < best:
                    best = key
        if best is None:
            return False
        _pivot(T, obj, basis, best[2], col)


def _objective(T: list[Row], basis: list[int], cost: list[Fraction]) -> Row:
    obj = list(cost) + [Fraction(0)]
    for r, bv in enumerate(basis):
        if cost[bv] != 0:
            f = cost[bv]
            obj = [a - f * b for a, b in zip(obj, T[r])]
    return obj


def lp_relax(inst: IlpInstance) -> LpSolution:
    """Optimal vertex of the LP relaxation, in the coordinates of ``inst``."""
    norm = inst.normalized()
    d, n = norm.d, norm.n
    # columns: y_0..y_{n-1}, s_0..s_{n-1}, art_0..art_{d-1}
    ncols = 2 * n + d
    T: list[Row] = []
    basis: list[int] = []
    for r in range(d):
        sign = -1 if norm.b[r] < 0 else 1
        row = [Fraction(0)] * (ncols + 1)
        for i in range(n):
            row[i] = Fraction(sign * norm.A[r][i])
        row[2 * n + r] = Fraction(1)
        row[-1] = Fraction(sign * norm.b[r])
        T.append(row)
        basis.append(2 * n + r)
    for i in range(n):
        row = [Fraction(0)] * (ncols + 1)
        row[i] = Fraction(1)
        row[n + i] = Fraction(1)
        row[-1] = Fraction(norm.upper[i])
        T.append(row)
        basis.append(n + i)

    phase1 = [Fraction(0)] * (2 * n) + [Fraction(-1)] * d
    obj = _objective(T, basis, phase1)
    _run(T, obj, basis, [True] * ncols)
    if obj[-1] != 0:  # -(sum of artificials) < 0 at the optimum
        return LpSolution(Status.INFEASIBLE)

    # drive zero-valued artificials out of the basis, dropping redundant rows
    r = 0
    while r < len(T):
        if basis[r] >= 2 * n:
            col = next((j for j in range(2 * n) if T[r][j] != 0), None)
            if col is None:
                del T[r], basis[r]
                continue
            _pivot(T, obj, basis, r, col)
        r += 1

    cost = [Fraction(v) for v in norm.c] + [Fraction(0)] * (n + d)
    obj = _objective(T, basis, cost)
    if not _run(T, obj, basis, [True] * (2 * n) + [False] * d):
        return LpSolution(Status.UNBOUNDED)
    y = [Fraction(0)] * n
    for r, bv in enumerate(basis):
        if bv < n:
            y[bv] = T[r][-1]
    x = tuple(yi + li for yi, li in zip(y, inst.lower))
    value = sum((Fraction(ci) * xi for ci, xi in zip(inst.c, x)), Fraction(0))
    return LpSolution(Status.OPTIMAL, x, value)
