"""Dense d-dimensional arrays over the integers extended by NEG_INF.

Layout is column-major ("dimension 1 fastest"): the entry at position
``v`` lives at flat index ``v[0] + L[0]*v[1] + L[0]*L[1]*v[2] + ...``.
This is the same order the Kronecker embedding in :mod:`maxplus.maxconv`
uses, so linearisation is a reindex plus padding.

Storage is a read-only ``int64`` buffer. NEG_INF is stored as the reserved
code ``INT64_MIN``; that code compares below every finite value, so
comparisons and max-reductions on the raw buffer are already correct, but
additions must go through masked kernels. Finite values therefore live in
``[INT64_MIN + 1, INT64_MAX]``.
"""
from __future__ import annotations

import itertools
from functools import reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ArithmeticOverflow, InvalidPosition, ShapeError

INT64_MAX = int(np.iinfo(np.int64).max)
INT64_MIN = int(np.iinfo(np.int64).min)
NEG_CODE = INT64_MIN
FINITE_MIN = INT64_MIN + 1
FINITE_MAX = INT64_MAX


class _NegInf:
    """The absorbing ``-inf`` of the (max,+) semiring.

    ``NEG_INF + x`` is ``NEG_INF`` and ``NEG_INF`` compares below every
    integer. Only addition with ints is defined; anything else raises.
    """

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NEG_INF"

    def __reduce__(self):
        return (_NegInf, ())

    def __add__(self, other):
        if other is self or isinstance(other, (int, np.integer)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("NEG_INF")

    def __lt__(self, other):
        if other is self:
            return False
        if isinstance(other, (int, np.integer)):
            return True
        return NotImplemented

    def __le__(self, other):
        if other is self or isinstance(other, (int, np.integer)):
            return True
        return NotImplemented

    def __gt__(self, other):
        if other is self or isinstance(other, (int, np.integer)):
            return False
        return NotImplemented

    def __ge__(self, other):
        if other is self:
            return True
        if isinstance(other, (int, np.integer)):
            return False
        return NotImplemented


NEG_INF = _NegInf()


def is_neg_inf(x) -> bool:
    return x is NEG_INF


def check_finite(x: int) -> int:
    if not FINITE_MIN <= x <= FINITE_MAX:
        raise ArithmeticOverflow(f"value {x} outside the signed 64-bit range")
    return x


def ext_add(x, y):
    """Saturating-at-NEG_INF, overflow-checked addition of extended ints."""
    if x is NEG_INF or y is NEG_INF:
        return NEG_INF
    return check_finite(int(x) + int(y))


def ext_max(*xs):
    best = NEG_INF
    for x in xs:
        if x is not NEG_INF and (best is NEG_INF or x > best):
            best = int(x)
    return best


def encode(x) -> int:
    """Map an extended integer (``NEG_INF`` or ``None`` allowed) to its storage code."""
    if x is None or x is NEG_INF:
        return NEG_CODE
    return check_finite(int(x))


def decode(code: int):
    code = int(code)
    return NEG_INF if code == NEG_CODE else code


# -- size vectors and positions ---------------------------------------------


def as_size(L: Iterable[int]) -> tuple[int, ...]:
    size = tuple(int(x) for x in L)
    if not size:
        raise ShapeError("size vector must have at least one dimension")
    if any(x < 1 for x in size):
        raise ShapeError(f"size components must be >= 1, got {size}")
    if num_entries(size) > INT64_MAX:
        raise ShapeError(f"product of {size} does not fit in 64 bits")
    return size


def num_entries(L: Sequence[int]) -> int:
    return reduce(lambda a, b: a * b, L, 1)


def strides(L: Sequence[int]) -> tuple[int, ...]:
    out, acc = [], 1
    for x in L:
        out.append(acc)
        acc *= x
    return tuple(out)


def valid_position(v: Sequence[int], L: Sequence[int]) -> bool:
    return len(v) == len(L) and all(0 <= a < b for a, b in zip(v, L))


def linear_index(v: Sequence[int], L: Sequence[int]) -> int:
    """Flat index of position ``v`` in an array of size ``L``."""
    if not valid_position(v, L):
        raise InvalidPosition(f"position {tuple(v)} is not valid for size {tuple(L)}")
    idx, acc = 0, 1
    for a, b in zip(v, L):
        idx += a * acc
        acc *= b
    return idx


def position_of(idx: int, L: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`."""
    if not 0 <= idx < num_entries(L):
        raise InvalidPosition(f"flat index {idx} out of range for size {tuple(L)}")
    out = []
    for b in L:
        idx, r = divmod(idx, b)
        out.append(r)
    return tuple(out)


def positions(L: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All valid positions of size ``L`` in increasing linear-index order."""
    ranges = [range(x) for x in reversed(tuple(L))]
    for rev in itertools.product(*ranges):
        yield rev[::-1]


# -- the array type ---------------------------------------------------------


class MDArray:
    """Immutable dense d-dimensional array of extended integers.

    ``nd`` is a read-only numpy view indexed as ``nd[v1, ..., vd]``;
    ``flat`` is the same buffer in linear-index order. Build new arrays with
    :meth:`from_ndarray`, :meth:`from_values`, :meth:`from_nested` or
    :meth:`full`.
    """

    __slots__ = ("size", "_nd")

    def __init__(self, size: Sequence[int], nd: np.ndarray):
        size = as_size(size)
        if nd.shape != size or nd.dtype != np.int64:
            raise ShapeError(f"buffer of shape {nd.shape}/{nd.dtype} does not match size {size}")
        nd.setflags(write=False)
        self.size = size
        self._nd = nd

    # construction

    @classmethod
    def from_ndarray(cls, arr: np.ndarray) -> "MDArray":
        """Copy a code-valued array (``NEG_CODE`` marks NEG_INF)."""
        arr = np.asarray(arr)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        return cls(arr.shape, np.array(arr, dtype=np.int64, order="F", copy=True))

    @classmethod
    def from_values(cls, size: Sequence[int], values: Iterable) -> "MDArray":
        """Build from a flat iterable in linear-index order; None/NEG_INF allowed."""
        size = as_size(size)
        flat = np.fromiter((encode(x) for x in values), dtype=np.int64)
        if flat.size != num_entries(size):
            raise ShapeError(f"got {flat.size} values for size {size}")
        return cls(size, flat.reshape(size, order="F"))

    @classmethod
    def from_nested(cls, nested) -> "MDArray":
        """Build from nested lists where ``nested[v1][v2]...`` is entry ``v``."""
        obj = np.array(nested, dtype=object)
        if obj.ndim == 0:
            obj = obj.reshape(1)
        codes = np.vectorize(encode, otypes=[np.int64])(obj) if obj.size else obj.astype(np.int64)
        return cls(obj.shape, np.asfortranarray(codes))

    @classmethod
    def full(cls, size: Sequence[int], value) -> "MDArray":
        size = as_size(size)
        return cls(size, np.full(size, encode(value), dtype=np.int64, order="F"))

    @classmethod
    def unit(cls, size: Sequence[int]) -> "MDArray":
        """0 at the origin, NEG_INF elsewhere: the identity of exact-weight convolution."""
        size = as_size(size)
        nd = np.full(size, NEG_CODE, dtype=np.int64, order="F")
        nd[(0,) * len(size)] = 0
        return cls(size, nd)

    # accessors

    @property
    def d(self) -> int:
        return len(self.size)

    @property
    def nd(self) -> np.ndarray:
        return self._nd

    @property
    def flat(self) -> np.ndarray:
        return self._nd.reshape(-1, order="F")

    @property
    def finite_mask(self) -> np.ndarray:
        return self._nd != NEG_CODE

    def __len__(self) -> int:
        return num_entries(self.size)

    def __getitem__(self, v):
        if isinstance(v, (int, np.integer)):
            v = (int(v),)
        v = tuple(v)
        if not valid_position(v, self.size):
            raise InvalidPosition(f"position {v} is not valid for size {self.size}")
        return decode(self._nd[v])

    def values(self) -> list:
        """Entries in linear-index order as ints / NEG_INF."""
        return [decode(x) for x in self.flat]

    def to_ndarray(self) -> np.ndarray:
        """Writable copy of the code buffer (the builder path)."""
        return np.array(self._nd, order="F", copy=True)

    def finite_values(self) -> np.ndarray:
        return self._nd[self._nd != NEG_CODE]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MDArray):
            return NotImplemented
        return self.size == other.size and bool(np.array_equal(self._nd, other._nd))

    def __hash__(self):
        return hash((self.size, self._nd.tobytes(order="F")))

    def __repr__(self) -> str:
        return f"MDArray(size={self.size}, data={self.values()})"


def monotone_increasing(A: MDArray) -> bool:
    """True iff ``A_v <= A_u`` whenever ``v <= u`` componentwise.

    The partial order is generated by unit steps, so comparing each entry
    with its successor along every axis is enough.
    """
    nd = A.nd
    for axis in range(A.d):
        n = nd.shape[axis]
        if n > 1:
            lo = np.take(nd, range(n - 1), axis=axis)
            hi = np.take(nd, range(1, n), axis=axis)
            if np.any(lo > hi):
                return False
    return True
