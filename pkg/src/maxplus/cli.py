"""``maxplus`` command line: convolution, knapsack and ILP solvers, reductions, generators, benchmarks.

Exit codes: 0 success, 2 input error, 3 solver error (budget or overflow),
4 verification mismatch.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import io
from .errors import (
    InvalidPosition,
    MaxplusError,
    NonConcaveInput,
    PreconditionViolated,
    ShapeError,
    UnboundedProfit,
)
from .ilp import SOLVERS as ILP_SOLVERS
from .ilp import HalvingGraph, IlpInstance, brute_force_ilp, solve_divide_conquer, solve_proximity
from .knapsack import (
    Item,
    KnapsackInstance,
    Semantics,
    SolutionArray,
    Variant,
    bellman_dp,
    brute_force,
    solve_exact_eq,
    to_at_most,
)
from .maxconv import (
    conv1d_concave,
    conv_naive,
    conv_via_linearization,
    upper_bound_check_naive,
)
from .mdarray import MDArray
from .reductions import (
    bounded_to_zero_one,
    conv_via_upperbound_oracle,
    knapsack_via_conv,
    monotonize,
    superadd_to_knapsack,
    upperbound_to_superadd,
)
from .ring import REDUCTIONS, RingConfig, run_ring

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_MISMATCH = 0, 2, 3, 4


class CliInputError(Exception):
    pass


@dataclass
class RunReport:
    solver: str
    wall_seconds: float
    digest: str
    verdict: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def resolve_threads(flag: int) -> int:
    env = os.environ.get("MAXPLUS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliInputError(f"MAXPLUS_THREADS must be an integer, got {env!r}")
    return max(1, flag)


def _emit(doc: dict, out: Optional[str]) -> None:
    if out:
        io.write_json(doc, out)
    else:
        print(io.canonical(doc))


def _timed(fn: Callable, *args, **kwargs):
    start = time.perf_counter()
    res = fn(*args, **kwargs)
    return res, time.perf_counter() - start


# -- conv ---------------------------------------------------------------------


def cmd_conv(args) -> int:
    A, B, out_size = io.load_conv(args.input)
    threads = resolve_threads(args.threads)
    if args.engine == "naive":
        C, secs = _timed(conv_naive, A, B, out_size, threads)
    elif args.engine == "linearized":
        if out_size is not None and out_size != A.size:
            raise CliInputError("the linearized engine computes the truncated convolution only")
        C, secs = _timed(conv_via_linearization, A, B)
    else:
        if A.d != 1:
            raise CliInputError("the concave engine needs one-dimensional arrays")
        C, secs = _timed(conv1d_concave, A, B, out_size[0] if out_size else A.size[0])
    doc = io.array_to_doc(C)
    _emit(doc, args.out)
    report = RunReport(f"conv/{args.engine}", secs, io.digest(doc))
    print(report.to_json(), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


# -- knapsack ---------------------------------------------------------------------


def _solve_knapsack(inst: KnapsackInstance, args) -> SolutionArray:
    if args.solver == "classconv":
        return solve_exact_eq(inst)
    if args.solver == "bellman":
        return bellman_dp(inst)
    if args.solver == "brute":
        return brute_force(inst)
    if args.delta is None or args.seed is None:
        raise CliInputError("--solver colorcoding needs --delta and --seed")
    if not 0 < args.delta < 1:
        raise CliInputError("--delta must lie in (0, 1)")
    zo = inst if inst.variant is Variant.ZERO_ONE else bounded_to_zero_one(inst)
    return knapsack_via_conv(zo, args.delta, args.seed)


def cmd_knapsack(args) -> int:
    inst = io.load_knapsack(args.input)
    semantics = Semantics(args.semantics)
    if args.solver == "colorcoding" and semantics is Semantics.EXACT_WEIGHT:
        raise CliInputError("colorcoding only produces at-most-weight tables; use --semantics atmost")
    sol, secs = _timed(_solve_knapsack, inst, args)
    if semantics is Semantics.AT_MOST_WEIGHT and sol.semantics is not Semantics.AT_MOST_WEIGHT:
        sol = to_at_most(sol)
    doc = io.solution_to_doc(sol)
    verdict = None
    if args.verify:
        ref = brute_force(inst)
        if semantics is Semantics.AT_MOST_WEIGHT:
            ref = to_at_most(ref)
        verdict = "match" if ref.array == sol.array else "mismatch"
    _emit(doc, args.out)
    report = RunReport(f"knapsack/{args.solver}", secs, io.digest(doc), verdict)
    print(report.to_json(), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_MISMATCH if verdict == "mismatch" else EXIT_OK


# -- ilp ------------------------------------------------------------------------------


def cmd_ilp(args) -> int:
    inst = io.load_ilp(args.input)
    res, secs = _timed(ILP_SOLVERS[args.solver], inst)
    doc = io.ilp_result_to_doc(res)
    verdict = None
    if args.verify:
        ref = brute_force_ilp(inst)
        same = ref.status == res.status and ref.value == res.value
        if res.x is not None:
            same = same and inst.is_feasible(res.x) and inst.value(res.x) == res.value
        verdict = "match" if same else "mismatch"
    print(f"status {res.status.value}")
    if res.x is not None:
        print(f"value {res.value}")
        print("x " + " ".join(map(str, res.x)))
    if args.out:
        io.write_json(doc, args.out)
    print(RunReport(f"ilp/{args.solver}", secs, io.digest(doc), verdict).to_json())
    return EXIT_MISMATCH if verdict == "mismatch" else EXIT_OK


# -- reductions -----------------------------------------------------------------------


def cmd_reduce(args) -> int:
    kind = args.reduction
    if kind == "zero-one":
        doc = io.knapsack_to_doc(bounded_to_zero_one(io.load_knapsack(args.input)))
    elif kind == "monotonize":
        doc = io.array_to_doc(monotonize(io.load_array(args.input)))
    elif kind == "primal-dual":
        pd = superadd_to_knapsack(monotonize(io.load_array(args.input)))
        doc = io.knapsack_to_doc(pd.instance)
        doc["threshold"] = pd.threshold
    elif kind == "block":
        raw = io.read_json(args.input)
        io.validate(raw, "conv")
        if "C" not in raw:
            raise CliInputError("the block reduction needs a conv file with an extra array 'C'")
        A, B, C = (io.array_from_doc(raw[k]) for k in ("A", "B", "C"))
        doc = io.array_to_doc(upperbound_to_superadd(A, B, C))
    else:
        A, B, _ = io.load_conv(args.input)
        doc = io.array_to_doc(conv_via_upperbound_oracle(A, B, upper_bound_check_naive))
    _emit(doc, args.out)
    return EXIT_OK


def cmd_verify_ring(args) -> int:
    if args.dims < 1 or args.max_size < 1 or args.trials < 1:
        raise CliInputError("--dims, --max-size and --trials must be positive")
    cfg = RingConfig(
        dims=args.dims, max_size=args.max_size, trials=args.trials, seed=args.seed, fault=args.inject_fault
    )
    report = run_ring(cfg)
    print(report.table())
    return EXIT_OK if report.ok else EXIT_MISMATCH


# -- generators -------------------------------------------------------------------------


def _rand_size(rng, dims: int, tmax: int) -> list[int]:
    return [int(x) for x in rng.integers(1, tmax + 1, size=dims)]


def _rand_array(rng, size, lo=-50, hi=50) -> MDArray:
    return MDArray.from_ndarray(rng.integers(lo, hi + 1, size=tuple(size)))


def generate(kind: str, dims: int, n: int, tmax: int, delta_max: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    if kind == "array":
        return io.array_to_doc(_rand_array(rng, _rand_size(rng, dims, tmax)))
    if kind == "conv":
        size = _rand_size(rng, dims, tmax)
        return io.conv_to_doc(_rand_array(rng, size), _rand_array(rng, size))
    if kind == "knapsack":
        t = [int(x) for x in rng.integers(0, tmax + 1, size=dims)]
        items = [
            Item(tuple(int(rng.integers(0, ti + 1)) for ti in t), int(rng.integers(-3, 11)), 1) for _ in range(n)
        ]
        items = [it if any(it.weight) or it.profit <= 0 else Item(it.weight, 0, 1) for it in items]
        return io.knapsack_to_doc(KnapsackInstance(items, tuple(t), Variant.ZERO_ONE))
    A = rng.integers(-delta_max, delta_max + 1, size=(dims, n))
    u = rng.integers(0, tmax + 1, size=n)
    x = rng.integers(0, u + 1)
    inst = IlpInstance(A.tolist(), (A @ x).tolist(), rng.integers(-5, 6, size=n).tolist(), None, u.tolist())
    return io.ilp_to_doc(inst)


def cmd_gen(args) -> int:
    if min(args.dims, args.n, args.tmax) < 1 or args.delta_max < 0:
        raise CliInputError("--dims, --n and --tmax must be positive, --delta-max non-negative")
    _emit(generate(args.kind, args.dims, args.n, args.tmax, args.delta_max, args.seed), args.out)
    return EXIT_OK


# -- benchmarks -----------------------------------------------------------------------


def _best_of(fn: Callable, repeats: int) -> int:
    best = None
    for _ in range(repeats):
        start = time.perf_counter_ns()
        fn()
        took = time.perf_counter_ns() - start
        best = took if best is None else min(best, took)
    return best


def bench_rows(suite: str, sizes: Sequence[int], repeats: int = 3, seed: int = 0) -> list[dict]:
    """Rows with columns ``suite, params, solver, wall_ns, entries``."""
    rng = np.random.default_rng(seed)
    rows = []
    if suite == "conv":
        for s in sizes:
            A, B = _rand_array(rng, (s, 2)), _rand_array(rng, (s, 2))
            r = _rand_array(rng, (s,))
            a = MDArray.from_values((s,), [-(i * i) for i in range(s)])
            cases = {
                "naive": lambda: conv_naive(A, B),
                "linearized": lambda: conv_via_linearization(A, B),
                "concave": lambda: conv1d_concave(r, a, s),
            }
            for name, fn in cases.items():
                entries = s if name == "concave" else 2 * s
                rows.append(dict(suite=suite, params=f"size={s}", solver=name, wall_ns=_best_of(fn, repeats), entries=entries))
    elif suite == "knapsack":
        # D = 4 weight classes and a fixed capacity; each size is the number of
        # items per class, so total multiplicity scales while D and t do not
        t = (60, 60)
        weights = [(1, 2), (2, 1), (3, 1), (1, 3)]
        for s in sizes:
            items = [Item(w, int(rng.integers(1, 10)), 20) for w in weights for _ in range(s)]
            inst = KnapsackInstance(items, t, Variant.BOUNDED)
            entries = (t[0] + 1) * (t[1] + 1)
            mult = inst.total_multiplicity()
            for name, fn in (("classconv", solve_exact_eq), ("bellman", bellman_dp)):
                rows.append(
                    dict(
                        suite=suite,
                        params=f"items_per_class={s};multiplicity={mult}",
                        solver=name,
                        wall_ns=_best_of(lambda fn=fn: fn(inst), repeats),
                        entries=entries,
                    )
                )
    elif suite == "ilp":
        for s in sizes:
            A = rng.integers(-2, 3, size=(2, s))
            u = rng.integers(0, 4, size=s)
            x = rng.integers(0, u + 1)
            inst = IlpInstance(A.tolist(), (A @ x).tolist(), rng.integers(-5, 6, size=s).tolist(), None, u.tolist())
            graph = HalvingGraph()
            solve_divide_conquer(inst, graph)
            rows.append(
                dict(
                    suite=suite,
                    params=f"n={s};vertices={graph.vertices}",
                    solver="divconq",
                    wall_ns=_best_of(lambda: solve_divide_conquer(inst), repeats),
                    entries=graph.vertices,
                )
            )
            rows.append(
                dict(
                    suite=suite,
                    params=f"n={s}",
                    solver="proximity",
                    wall_ns=_best_of(lambda: solve_proximity(inst), repeats),
                    entries=s,
                )
            )
    else:
        raise CliInputError(f"unknown suite {suite!r}")
    return rows


BENCH_COLUMNS = ["suite", "params", "solver", "wall_ns", "entries"]


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.sizes) if args.sizes else {"conv": [16, 32, 64, 128, 256], "knapsack": [1, 10], "ilp": [2, 4, 6]}[args.suite]
    rows = bench_rows(args.suite, sizes, args.repeats, args.seed)
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.csv:
            fh.close()
    return EXIT_OK


def _parse_sizes(text: str) -> list[int]:
    """``"16,32,64"`` or a range ``"16..256"`` (doubling)."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            out = []
            while lo <= hi:
                out.append(lo)
                lo *= 2
            return out
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise CliInputError(f"cannot parse sizes {text!r}")


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maxplus", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker threads (MAXPLUS_THREADS overrides)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("conv", help="(max,+)-convolution of two arrays")
    c.add_argument("input")
    c.add_argument("--engine", choices=["naive", "linearized", "concave"], default="naive")
    c.add_argument("--out")
    c.set_defaults(func=cmd_conv)

    k = sub.add_parser("knapsack", help="solve a multidimensional knapsack instance")
    k.add_argument("input")
    k.add_argument("--solver", choices=["classconv", "bellman", "brute", "colorcoding"], default="classconv")
    k.add_argument("--delta", type=float)
    k.add_argument("--seed", type=int)
    k.add_argument("--semantics", choices=[s.value for s in Semantics], default="exact")
    k.add_argument("--verify", action="store_true", help="compare with brute force")
    k.add_argument("--out")
    k.set_defaults(func=cmd_knapsack)

    i = sub.add_parser("ilp", help="solve a bounded integer program")
    i.add_argument("input")
    i.add_argument("--solver", choices=sorted(ILP_SOLVERS), default="proximity")
    i.add_argument("--verify", action="store_true", help="compare with brute force")
    i.add_argument("--out")
    i.set_defaults(func=cmd_ilp)

    r = sub.add_parser("reduce", help="apply one constructive reduction to a file")
    r.add_argument("reduction", choices=["zero-one", "monotonize", "primal-dual", "block", "oracle-conv"])
    r.add_argument("input")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify-ring", help="check every reduction against naive checkers")
    v.add_argument("--dims", type=int, default=2)
    v.add_argument("--max-size", type=int, default=5, help="largest length per dimension")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", choices=list(REDUCTIONS), help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify_ring)

    g = sub.add_parser("gen", help="write a random instance")
    g.add_argument("--kind", choices=["array", "conv", "knapsack", "ilp"], required=True)
    g.add_argument("--dims", type=int, default=1)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--tmax", type=int, default=6)
    g.add_argument("--delta-max", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="timing table as CSV")
    b.add_argument("--suite", choices=["conv", "knapsack", "ilp"], required=True)
    b.add_argument("--sizes", help="comma list or doubling range like 16..256")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        io.InputError,
        CliInputError,
        ShapeError,
        InvalidPosition,
        NonConcaveInput,
        PreconditionViolated,
        UnboundedProfit,
    ) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MaxplusError, ArithmeticError, MemoryError) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
