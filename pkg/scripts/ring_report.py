"""Run the reduction ring over several seeds and dimensions and summarise the results."""
import argparse
import sys
import time

from maxplus.ring import RingConfig, run_ring


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--max-size", type=int, default=6)
    args = ap.parse_args(argv)

    failures = 0
    for dims in args.dims:
        for seed in range(args.seeds):
            start = time.perf_counter()
            rep = run_ring(RingConfig(dims=dims, max_size=args.max_size, trials=args.trials, seed=seed))
            secs = time.perf_counter() - start
            print(f"dims={dims} seed={seed} ({secs:.1f}s)")
            print(rep.table())
            print()
            failures += not rep.ok
    print("all passed" if not failures else f"{failures} configuration(s) failed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
