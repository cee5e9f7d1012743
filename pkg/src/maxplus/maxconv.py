"""(max,+)-convolution engines and the naive upper-bound / superadditivity checks."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ArithmeticOverflow, NonConcaveInput, ShapeError
from .mdarray import (
    FINITE_MAX,
    FINITE_MIN,
    NEG_CODE,
    NEG_INF,
    MDArray,
    as_size,
    encode,
    positions,
)

Engine1D = Callable[[MDArray, MDArray, int], MDArray]
UpperBoundOracle = Callable[[MDArray, MDArray, MDArray], bool]
Seq1D = Union[MDArray, Sequence]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MAXPLUS_THREADS", "1")))
    except ValueError:
        return 1


def _out_size(A: MDArray, B: MDArray, out_size) -> tuple[int, ...]:
    if A.d != B.d:
        raise ShapeError(f"dimension mismatch: {A.size} vs {B.size}")
    if out_size is None:
        out = A.size if A.size == B.size else tuple(a + b - 1 for a, b in zip(A.size, B.size))
    else:
        out = as_size(out_size)
    if len(out) != A.d or any(o > a + b - 1 for o, a, b in zip(out, A.size, B.size)):
        raise ShapeError(f"out_size {out} exceeds A.size + B.size - 1 for {A.size}, {B.size}")
    return out


def _sum_may_overflow(A: MDArray, B: MDArray) -> bool:
    fa, fb = A.finite_values(), B.finite_values()
    if fa.size == 0 or fb.size == 0:
        return False
    hi = int(fa.max()) + int(fb.max())
    lo = int(fa.min()) + int(fb.min())
    return hi > FINITE_MAX or lo < FINITE_MIN


def _conv_exact_python(A: MDArray, B: MDArray, out: tuple[int, ...]) -> MDArray:
    # slow path, only taken when a 64-bit sum might overflow; any such sum raises
    C = {}
    for u in positions(A.size):
        au = A[u]
        if au is NEG_INF:
            continue
        for w in positions(B.size):
            v = tuple(x + y for x, y in zip(u, w))
            if any(x >= o for x, o in zip(v, out)):
                continue
            bw = B[w]
            if bw is NEG_INF:
                continue
            s = au + bw
            if not FINITE_MIN <= s <= FINITE_MAX:
                raise ArithmeticOverflow(f"A{u} + B{w} = {s} overflows 64 bits")
            if v not in C or s > C[v]:
                C[v] = s
    return MDArray.from_values(out, (C.get(v) for v in positions(out)))


def _accumulate(C: np.ndarray, A_nd: np.ndarray, B_nd: np.ndarray, B_fin: np.ndarray, us, out):
    for u in us:
        au = int(A_nd[u])
        ext = tuple(min(b, o - x) for b, o, x in zip(B_nd.shape, out, u))
        if min(ext) <= 0:
            continue
        bsl = tuple(slice(0, e) for e in ext)
        csl = tuple(slice(x, x + e) for x, e in zip(u, ext))
        cand = np.where(B_fin[bsl], B_nd[bsl] + au, NEG_CODE)
        np.maximum(C[csl], cand, out=C[csl])


def conv_naive(A: MDArray, B: MDArray, out_size=None, threads: Optional[int] = None) -> MDArray:
    """Quadratic (max,+)-convolution ``C_v = max_{u+w=v} A_u + B_w`` truncated to ``out_size``.

    ``out_size`` defaults to the common size for equal-size operands (the
    truncated problem) and to ``A.size + B.size - 1`` otherwise.
    """
    out = _out_size(A, B, out_size)
    if _sum_may_overflow(A, B):
        return _conv_exact_python(A, B, out)
    # iterate over the operand with fewer finite entries; the other is vectorised
    if np.count_nonzero(A.finite_mask) > np.count_nonzero(B.finite_mask):
        A, B = B, A
    A_nd, B_nd = A.nd, B.nd
    B_fin = B.finite_mask
    us = [tuple(int(c) for c in u) for u in np.argwhere(A.finite_mask)]
    threads = threads or default_threads()
    if threads <= 1 or len(us) < 64:
        C = np.full(out, NEG_CODE, dtype=np.int64, order="F")
        _accumulate(C, A_nd, B_nd, B_fin, us, out)
    else:
        parts = [us[i::threads] for i in range(threads)]
        bufs = [np.full(out, NEG_CODE, dtype=np.int64, order="F") for _ in parts]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda p: _accumulate(p[0], A_nd, B_nd, B_fin, p[1], out), zip(bufs, parts)))
        C = bufs[0]
        for buf in bufs[1:]:
            np.maximum(C, buf, out=C)
    return MDArray(out, C)


def conv1d_naive(r: MDArray, a: MDArray, out_len: int) -> MDArray:
    """1-D engine wrapper around :func:`conv_naive`; default engine for linearisation."""
    return conv_naive(r, a, (out_len,))


# -- Kronecker linearisation ----------------------------------------------


def kronecker_strides(L: Sequence[int]) -> tuple[int, ...]:
    """Strides ``1, D1, D1*D2, ...`` with padding ``D_i = 2 L_i - 1``."""
    out, acc = [], 1
    for x in L:
        out.append(acc)
        acc *= 2 * x - 1
    return tuple(out)


def kronecker_index(v: Sequence[int], L: Sequence[int]) -> int:
    return sum(x * s for x, s in zip(v, kronecker_strides(L)))


def embed_1d(A: MDArray) -> MDArray:
    """Place ``A`` on its Kronecker positions in a 1-D array; gaps hold NEG_INF."""
    L = A.size
    st = kronecker_strides(L)
    length = kronecker_index([x - 1 for x in L], L) + 1
    flat = np.full(length, NEG_CODE, dtype=np.int64)
    grids = np.meshgrid(*[np.arange(x) for x in L], indexing="ij")
    idx = sum(g * s for g, s in zip(grids, st))
    flat[idx.reshape(-1)] = A.nd.reshape(-1)
    return MDArray((length,), flat)


def conv_via_linearization(A: MDArray, B: MDArray, engine: Engine1D = conv1d_naive) -> MDArray:
    """Truncated d-dimensional convolution computed by one 1-D engine call.

    Sums of two embedded positions never carry across a padded stride, so the
    1-D product at the embedded index of ``v`` collects exactly the pairs
    ``u + w = v``.
    """
    if A.size != B.size:
        raise ShapeError(f"linearisation needs equal sizes, got {A.size} and {B.size}")
    L = A.size
    ea, eb = embed_1d(A), embed_1d(B)
    res = engine(ea, eb, len(ea))
    st = kronecker_strides(L)
    grids = np.meshgrid(*[np.arange(x) for x in L], indexing="ij")
    idx = sum(g * s for g, s in zip(grids, st))
    return MDArray.from_ndarray(np.asarray(res.flat)[idx])


# -- concave convolution (SMAWK) --------------------------------------------


def _smawk_row_argmax(nrows: int, ncols: int, value: Callable[[int, int], int]) -> list[int]:
    """Leftmost row maxima of a totally monotone (inverse Monge) matrix in O(nrows + ncols)."""
    result = [0] * nrows

    def rec(rows: list[int], cols: list[int]) -> None:
        if not rows:
            return
        nr = len(rows)
        stack: list[int] = []
        for c in cols:
            while stack:
                row = rows[len(stack) - 1]
                if value(row, stack[-1]) >= value(row, c):
                    break
                stack.pop()
            if len(stack) < nr:
                stack.append(c)
        cols = stack
        rec(rows[1::2], cols)
        ci = 0
        for k in range(0, nr, 2):
            row = rows[k]
            last = result[rows[k + 1]] if k + 1 < nr else cols[-1]
            best = cols[ci]
            bv = value(row, best)
            while cols[ci] != last:
                ci += 1
                v = value(row, cols[ci])
                if v > bv:
                    best, bv = cols[ci], v
            result[row] = best

    rec(list(range(nrows)), list(range(ncols)))
    return result


def _finite_support(a: Sequence[Optional[int]]) -> tuple[int, int]:
    idx = [i for i, x in enumerate(a) if x is not None]
    if not idx:
        return -1, -1
    return idx[0], idx[-1]


def check_concave(a: Sequence[Optional[int]]) -> None:
    """Raise NonConcaveInput unless ``a`` is concave on a contiguous finite support."""
    s, e = _finite_support(a)
    if s < 0:
        return
    if any(a[i] is None for i in range(s, e + 1)):
        raise NonConcaveInput("NEG_INF entries must form a prefix and/or suffix")
    for i in range(s, e - 1):
        if a[i + 1] - a[i] < a[i + 2] - a[i + 1]:
            raise NonConcaveInput(f"differences increase at index {i + 1}")


def concave_maxconv(
    r: Sequence[Optional[int]],
    a: Sequence[Optional[int]],
    out_len: int,
    check: bool = __debug__,
) -> tuple[list[Optional[int]], list[int]]:
    """Core of :func:`conv1d_concave` on plain lists (``None`` is NEG_INF).

    Returns ``(c, arg)`` with ``c[j] = max_i r[i] + a[j - i]`` and ``arg[j]``
    the maximising ``i`` (``-1`` where ``c[j]`` is NEG_INF).

    NEG_INF entries are replaced by finite stand-ins before the SMAWK pass:
    entries of ``r`` drop to ``min(r) - G``, and ``a`` is extended beyond its
    support with slope ``G``. That extension keeps ``a`` concave, so the
    candidate matrix stays inverse Monge, and ``G`` is large enough that every
    stand-in combination loses to every genuine one.
    """
    n, m = len(r), len(a)
    if out_len > n + m - 1:
        raise ShapeError(f"out_len {out_len} exceeds len(r) + len(a) - 1 = {n + m - 1}")
    if check:
        check_concave(a)
    s, e = _finite_support(a)
    fr = [x for x in r if x is not None]
    if out_len <= 0:
        return [], []
    if s < 0 or not fr:
        return [None] * out_len, [-1] * out_len
    a_fin = a[s : e + 1]
    rmin, rmax = min(fr), max(fr)
    amin, amax = min(a_fin), max(a_fin)
    G = (rmax - rmin) + (amax - amin) + 1
    rr = [x if x is not None else rmin - G for x in r]
    a_s, a_e = a[s], a[e]
    av = list(a)

    def value(j: int, i: int) -> int:
        k = j - i
        if k < s:
            return rr[i] + a_s - G * (s - k)
        if k > e:
            return rr[i] + a_e - G * (k - e)
        return rr[i] + av[k]

    arg = _smawk_row_argmax(out_len, n, value)
    threshold = rmin + amin
    c: list[Optional[int]] = []
    for j, i in enumerate(arg):
        v = value(j, i)
        if v < threshold:
            c.append(None)
            arg[j] = -1
        else:
            if not FINITE_MIN <= v <= FINITE_MAX:
                raise ArithmeticOverflow(f"convolution value {v} overflows 64 bits")
            c.append(v)
    return c, arg


def _as_list(x: Seq1D) -> list[Optional[int]]:
    if isinstance(x, MDArray):
        if x.d != 1:
            raise ShapeError(f"expected a 1-D array, got size {x.size}")
        return [None if c == NEG_CODE else int(c) for c in x.flat]
    return [None if (v is None or v is NEG_INF) else encode(v) for v in x]


def conv1d_concave(r: Seq1D, a: Seq1D, out_len: Optional[int] = None) -> MDArray:
    """(max,+)-convolution of an arbitrary ``r`` with a concave ``a`` in linear time.

    ``a`` may carry NEG_INF only as a prefix and/or suffix. Concavity is
    validated when Python runs without ``-O``.
    """
    rl, al = _as_list(r), _as_list(a)
    if out_len is None:
        out_len = len(rl) + len(al) - 1
    c, _ = concave_maxconv(rl, al, out_len)
    return MDArray.from_values((out_len,), c)


def concave_engine(r: MDArray, a: MDArray, out_len: int) -> MDArray:
    """Engine-signature adapter so :func:`conv1d_concave` can drive linearisation."""
    return conv1d_concave(r, a, out_len)


# -- decision problems ------------------------------------------------------


def upper_bound_check_naive(A: MDArray, B: MDArray, C: MDArray) -> bool:
    """True iff ``(A (+) B)_v <= C_v`` for every position ``v``."""
    if not (A.size == B.size == C.size):
        raise ShapeError(f"sizes differ: {A.size}, {B.size}, {C.size}")
    conv = conv_naive(A, B, A.size)
    return bool(np.all(conv.nd <= C.nd))


def superadditive_check_naive(A: MDArray) -> bool:
    """True iff ``A_v >= (A (+) A)_v`` for every ``v``."""
    return upper_bound_check_naive(A, A, A)


def shift(A: MDArray, s: int) -> MDArray:
    """Add ``s`` to every finite entry."""
    fin = A.finite_mask
    if fin.any():
        lo, hi = int(A.finite_values().min()) + s, int(A.finite_values().max()) + s
        if lo < FINITE_MIN or hi > FINITE_MAX:
            raise ArithmeticOverflow(f"shift by {s} overflows 64 bits")
    return MDArray.from_ndarray(np.where(fin, A.nd + s, NEG_CODE))


__all__ = [
    "Engine1D",
    "UpperBoundOracle",
    "check_concave",
    "concave_engine",
    "concave_maxconv",
    "conv1d_concave",
    "conv1d_naive",
    "conv_naive",
    "conv_via_linearization",
    "embed_1d",
    "kronecker_index",
    "kronecker_strides",
    "shift",
    "superadditive_check_naive",
    "upper_bound_check_naive",
]
