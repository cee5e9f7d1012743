"""Bounded integer programs ``max c.x  s.t.  Ax = b, lower <= x <= upper`` and an exhaustive solver."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import InstanceTooLarge, ShapeError
from ..mdarray import check_finite

BRUTE_FORCE_LIMIT = 10**7
_CHUNK = 1 << 18


class Status(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


def _ivec(xs: Sequence[int]) -> tuple[int, ...]:
    return tuple(check_finite(int(x)) for x in xs)


@dataclass(frozen=True)
class IlpInstance:
    """Constraint matrix ``A`` (rows), right-hand side, profits and box bounds."""

    A: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]
    c: tuple[int, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __init__(self, A, b, c, lower=None, upper=None):
        rows = tuple(_ivec(row) for row in A)
        c = _ivec(c)
        n = len(c)
        lower = _ivec(lower) if lower is not None else (0,) * n
        if upper is None:
            raise ShapeError("upper bounds are required")
        upper = _ivec(upper)
        b = _ivec(b)
        if len(rows) != len(b):
            raise ShapeError(f"A has {len(rows)} rows but b has {len(b)} entries")
        if any(len(row) != n for row in rows):
            raise ShapeError(f"every row of A needs {n} entries")
        if len(lower) != n or len(upper) != n:
            raise ShapeError("bounds must have one entry per column")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ShapeError(f"lower bound exceeds upper bound: {lower} vs {upper}")
        object.__setattr__(self, "A", rows)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def delta(self) -> int:
        return max((abs(x) for row in self.A for x in row), default=0)

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(row[i] for row in self.A)

    def row_dot(self, x: Sequence) -> tuple:
        return tuple(sum(a * xi for a, xi in zip(row, x)) for row in self.A)

    def value(self, x: Sequence[int]) -> int:
        return sum(ci * xi for ci, xi in zip(self.c, x))

    def is_feasible(self, x: Sequence[int]) -> bool:
        return (
            len(x) == self.n
            and all(lo <= xi <= hi for lo, xi, hi in zip(self.lower, x, self.upper))
            and self.row_dot(x) == self.b
        )

    def normalized(self) -> "IlpInstance":
        """Shift ``x = lower + y`` so that ``0 <= y <= upper - lower``."""
        if not any(self.lower):
            return self
        rhs = tuple(bi - ai for bi, ai in zip(self.b, self.row_dot(self.lower)))
        return IlpInstance(
            self.A, rhs, self.c, (0,) * self.n, tuple(u - l for u, l in zip(self.upper, self.lower))
        )

    def lift(self, y: Sequence[int]) -> tuple[int, ...]:
        """Map a solution of :meth:`normalized` back to this instance."""
        return tuple(int(yi) + li for yi, li in zip(y, self.lower))


@dataclass(frozen=True)
class IlpResult:
    status: Status
    x: Optional[tuple[int, ...]] = None
    value: Optional[int] = None

    @classmethod
    def infeasible(cls) -> "IlpResult":
        return cls(Status.INFEASIBLE)

    @classmethod
    def optimal(cls, inst: IlpInstance, x: Sequence[int]) -> "IlpResult":
        """Build an OPTIMAL result after re-checking feasibility of ``x``."""
        x = tuple(int(v) for v in x)
        if not inst.is_feasible(x):
            raise AssertionError(f"solver produced an infeasible witness {x}")
        return cls(Status.OPTIMAL, x, check_finite(inst.value(x)))


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None


def brute_force_ilp(inst: IlpInstance) -> IlpResult:
    """Enumerate the whole box; ties go to the first point in enumeration order."""
    ranges = [hi - lo + 1 for lo, hi in zip(inst.lower, inst.upper)]
    total = 1
    for r in ranges:
        total *= r
    if total > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"{total} candidate points exceed the limit {BRUTE_FORCE_LIMIT}")
    if inst.n == 0:
        return IlpResult.optimal(inst, ()) if all(v == 0 for v in inst.b) else IlpResult.infeasible()
    A = np.array(inst.A, dtype=np.int64).reshape(inst.d, inst.n)
    b = np.array(inst.b, dtype=np.int64)
    c = np.array(inst.c, dtype=np.int64)
    lo = np.array(inst.lower, dtype=np.int64)
    best_val, best_x = None, None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        pts = np.empty((idx.size, inst.n), dtype=np.int64)
        rest = idx
        for i, r in enumerate(ranges):
            rest, pts[:, i] = np.divmod(rest, r)
        pts += lo
        ok = np.all(pts @ A.T == b, axis=1) if inst.d else np.ones(idx.size, dtype=bool)
        if not ok.any():
            continue
        vals = pts[ok] @ c
        k = int(np.argmax(vals))
        if best_val is None or int(vals[k]) > best_val:
            best_val, best_x = int(vals[k]), pts[ok][k]
    if best_x is None:
        return IlpResult.infeasible()
    return IlpResult.optimal(inst, best_x.tolist())
