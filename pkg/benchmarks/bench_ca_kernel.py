"""Time the compiled and numpy CA kernels on the same spread problems.

    python benchmarks/bench_ca_kernel.py [--size 200] [--periods 24] [--repeat 5]

Both kernels draw from the same counter-based streams, so the script also
checks that they burn exactly the same cells.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from wildfire_psps.wildfire import kernel


def make_problem(size: int, periods: int, seed: int):
    rng = np.random.default_rng(seed)
    fuel = rng.random((size, size)) > 0.1
    base_q = np.full((size, size), 0.45)
    wind = rng.uniform(0.6, 1.6, size=(periods + 1, 8))
    ign = np.full((size, size), 2e-5)
    fire = np.full((size, size), -1, dtype=np.int32)
    fire[size // 2, size // 2] = 0
    return fire, fuel, base_q, wind, ign


def run_once(backend: str, problem, key: int, periods: int):
    fire, fuel, base_q, wind, ign = problem
    start = time.perf_counter()
    out = kernel.propagate(fire.copy(), fuel, base_q, wind, ign, key, 1, periods, backend=backend)
    return time.perf_counter() - start, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200)
    ap.add_argument("--periods", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    problem = make_problem(args.size, args.periods, 0)
    backends = kernel.available_backends()
    timings = {b: [] for b in backends}
    for r in range(args.repeat):
        results = {}
        for b in backends:
            dt, out = run_once(b, problem, 1000 + r, args.periods)
            timings[b].append(dt)
            results[b] = out
        if len(results) == 2 and not np.array_equal(results["python"], results["cython"]):
            raise SystemExit(f"kernels disagree on repeat {r}")
    print(f"grid {args.size}x{args.size}, {args.periods} periods, {args.repeat} repeats")
    for b, ts in timings.items():
        print(f"  {b:>7}: median {statistics.median(ts) * 1e3:9.2f} ms")
    if len(timings) == 2:
        speedup = statistics.median(timings["python"]) / statistics.median(timings["cython"])
        print(f"  compiled speedup: {speedup:.1f}x (outputs identical)")
    else:
        print("  compiled kernel not built; only the numpy kernel was timed")


if __name__ == "__main__":
    main()
