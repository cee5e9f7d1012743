"""Round-trip checks for every constructive reduction, each judged by a naive checker.

Used by ``maxplus verify-ring`` and by the acceptance suite. Every row draws
fresh random inputs per trial from one seeded generator, so a seeded run is
reproducible.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .knapsack import Item, KnapsackInstance, Variant, brute_force, solve_exact_eq
from .maxconv import conv_naive, superadditive_check_naive, upper_bound_check_naive
from .mdarray import MDArray, monotone_increasing
from .reductions import (
    bounded_to_zero_one,
    conv_via_upperbound_oracle,
    decide_superadditive,
    find_violating_position,
    monotonize,
    upperbound_to_superadd,
)

REDUCTIONS = (
    "binary_encoding",
    "monotonize",
    "primal_dual",
    "block_array",
    "oracle_conv",
    "violating_position",
)


@dataclass
class RingConfig:
    dims: int = 2
    max_size: int = 5  # per-dimension length bound
    trials: int = 100
    seed: int = 0
    value_range: int = 9
    fault: Optional[str] = None  # name of a reduction whose output gets corrupted


@dataclass
class RingRow:
    name: str
    passed: int = 0
    failed: int = 0
    seconds: float = 0.0
    first_failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class RingReport:
    config: RingConfig
    rows: list[RingRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def table(self) -> str:
        # timings stay on the rows so that a seeded table is reproducible
        lines = [f"{'reduction':<20} {'pass':>6} {'fail':>6}  verdict"]
        for r in self.rows:
            lines.append(f"{r.name:<20} {r.passed:>6} {r.failed:>6}  {'PASS' if r.ok else 'FAIL'}")
        return "\n".join(lines)


# -- generators -------------------------------------------------------------


def _size(rng: np.random.Generator, cfg: RingConfig) -> tuple[int, ...]:
    d = int(rng.integers(1, cfg.dims + 1))
    return tuple(int(x) for x in rng.integers(1, cfg.max_size + 1, size=d))


def _array(rng, size, lo, hi) -> MDArray:
    return MDArray.from_ndarray(rng.integers(lo, hi + 1, size=size))


def _maybe_superadditive(rng, size, vr) -> MDArray:
    """Half of the draws are superadditive by construction, the rest are noise.

    The structured draws are ``a*|v|^2 + b*|v|``, which is superadditive for
    ``a >= 0``; half of them get one entry raised, which may break that.
    """
    if rng.random() < 0.5:
        return _array(rng, size, -vr, vr)
    l1 = sum(np.meshgrid(*[np.arange(x) for x in size], indexing="ij"))
    a, b = int(rng.integers(0, 3)), int(rng.integers(-2, 3))
    nd = a * l1 * l1 + b * l1
    if rng.random() < 0.5:
        flat = nd.reshape(-1)
        idx = int(rng.integers(0, flat.size))
        flat[idx] += int(rng.integers(1, 4))  # raising one entry can break it
    return MDArray.from_ndarray(nd)


def _upper_bound_triple(rng, size, vr):
    A, B = _array(rng, size, -vr, vr), _array(rng, size, -vr, vr)
    base = conv_naive(A, B).nd
    noise = rng.integers(-1, 3, size=size) if rng.random() < 0.5 else rng.integers(0, 2, size=size)
    return A, B, MDArray.from_ndarray(base + noise)


def _knapsack(rng, cfg: RingConfig) -> KnapsackInstance:
    size = _size(rng, cfg)
    t = tuple(x - 1 for x in size)
    n = int(rng.integers(1, 4))
    items = []
    for _ in range(n):
        w = tuple(int(rng.integers(0, ti + 1)) for ti in t)
        p = int(rng.integers(-3, 8))
        if not any(w):
            p = min(p, 0) if rng.random() < 0.5 else p
        bound = None if rng.random() < 0.4 else int(rng.integers(1, 4))
        if bound is None and not any(w) and p > 0:
            bound = 1
        items.append(Item(w, p, bound))
    variant = Variant.UNBOUNDED if all(it.bound is None for it in items) else Variant.BOUNDED
    return KnapsackInstance(items, t, variant)


# -- one trial per reduction -----------------------------------------------------


def _perturb(X: MDArray) -> MDArray:
    nd = X.to_ndarray()
    nd.reshape(-1, order="F")[0] = 7919 if nd.flat[0] != 7919 else 7920
    return MDArray(X.size, nd)


def _trial_binary(rng, cfg, fault):
    inst = _knapsack(rng, cfg)
    zo = bounded_to_zero_one(inst)
    got = brute_force(zo).array
    if fault:
        got = _perturb(got)
    want = brute_force(inst).array
    return got == want, f"instance {inst}"


def _trial_monotonize(rng, cfg, fault):
    size = _size(rng, cfg)
    A = _maybe_superadditive(rng, size, cfg.value_range)
    nd = A.to_ndarray()
    origin = (0,) * A.d
    nd[origin] = min(int(nd[origin]), 0)  # the verdict is only preserved for A_0 <= 0
    A = MDArray(A.size, nd)
    M = monotonize(A)
    verdict = superadditive_check_naive(M)
    if fault:
        verdict = not verdict
    ok = (
        verdict == superadditive_check_naive(A)
        and monotone_increasing(M)
        and bool(np.all(M.nd >= 0))
    )
    return ok, f"array {A}"


def _trial_primal_dual(rng, cfg, fault):
    size = _size(rng, cfg)
    A = _maybe_superadditive(rng, size, cfg.value_range)
    verdict = decide_superadditive(A, solve_exact_eq)
    if fault:
        verdict = not verdict
    return verdict == superadditive_check_naive(A), f"array {A}"


def _trial_block(rng, cfg, fault):
    size = _size(rng, cfg)
    A, B, C = _upper_bound_triple(rng, size, cfg.value_range)
    verdict = superadditive_check_naive(upperbound_to_superadd(A, B, C))
    if fault:
        verdict = not verdict
    return verdict == upper_bound_check_naive(A, B, C), f"triple {A}, {B}, {C}"


def _trial_oracle_conv(rng, cfg, fault):
    size = _size(rng, cfg)
    vr = cfg.value_range
    A, B = _array(rng, size, -vr, vr), _array(rng, size, -vr, vr)
    got = conv_via_upperbound_oracle(A, B, upper_bound_check_naive)
    if fault:
        got = _perturb(got)
    return got == conv_naive(A, B), f"pair {A}, {B}"


def _trial_violating(rng, cfg, fault):
    size = _size(rng, cfg)
    A, B, C = _upper_bound_triple(rng, size, cfg.value_range)
    snapshot = (A, B, C)
    v = find_violating_position(A, B, C, upper_bound_check_naive)
    if fault:
        v = None if v is not None else (0,) * len(size)
    holds = upper_bound_check_naive(A, B, C)
    if v is None:
        ok = holds
    else:
        ok = C[v] < conv_naive(A, B)[v]
    ok = ok and snapshot == (A, B, C)
    return ok, f"triple {A}, {B}, {C}"


TRIALS: dict[str, Callable] = {
    "binary_encoding": _trial_binary,
    "monotonize": _trial_monotonize,
    "primal_dual": _trial_primal_dual,
    "block_array": _trial_block,
    "oracle_conv": _trial_oracle_conv,
    "violating_position": _trial_violating,
}


def run_ring(cfg: RingConfig) -> RingReport:
    if cfg.fault is not None and cfg.fault not in TRIALS:
        raise ValueError(f"unknown reduction {cfg.fault!r}; choose from {', '.join(REDUCTIONS)}")
    report = RingReport(cfg)
    for k, name in enumerate(REDUCTIONS):
        rng = np.random.default_rng([cfg.seed, k])
        row = RingRow(name)
        start = time.perf_counter()
        for trial in range(cfg.trials):
            fault = cfg.fault == name and trial == 0
            ok, detail = TRIALS[name](rng, cfg, fault)
            if ok:
                row.passed += 1
            else:
                row.failed += 1
                row.first_failure = row.first_failure or detail
        row.seconds = time.perf_counter() - start
        report.rows.append(row)
    return report


__all__ = ["REDUCTIONS", "RingConfig", "RingReport", "RingRow", "run_ring"]
