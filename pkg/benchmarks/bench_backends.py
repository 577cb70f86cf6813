"""Compare the numba kernels with their numpy fallbacks.

Two parts:

* kernel micro-benchmarks, both backends in one process;
* end-to-end solver timings, one subprocess per backend, selected with the
  ``SPARSE_SMOOTH_DISABLE_NUMBA`` environment flag.

Usage: ``python3 benchmarks/bench_backends.py [--sizes 64,128] [--trials 5]``
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from sparse_smooth import _kernels

END_TO_END = r"""
import json, sys, time
import numpy as np
from sparse_smooth import BACKEND
from sparse_smooth.cli import _warm_up, make_instance, simulate_instance
from sparse_smooth.solvers import solve_coupled, solve_decoupled

sizes, trials = json.loads(sys.argv[1]), int(sys.argv[2])
_warm_up()
out = {"backend": BACKEND, "rows": []}
for n in sizes:
    insts = []
    for s in range(trials):
        _, p, y = simulate_instance(n, s)
        insts.append(make_instance(p, y, 0.08, 0.5))
    for name, solve in (("decoupled", solve_decoupled), ("coupled", solve_coupled)):
        ts = []
        for inst in insts:
            t0 = time.perf_counter()
            solve(inst)
            ts.append(time.perf_counter() - t0)
        out["rows"].append({"size": n, "method": name, "median_seconds": float(np.median(ts))})
print(json.dumps(out))
"""


def kernel_table(sizes, repeat=7):
    impls = {"numpy": _kernels.numpy_impl, "numba": _kernels.numba_impl}
    rows = []
    rng = np.random.default_rng(0)
    for n in sizes:
        x, xp, zp = rng.standard_normal((3, n, n))
        m = rng.random(n * n // 2)
        r = rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)
        cases = {
            "soft_threshold": lambda k: k.soft_threshold(x, 0.3),
            "laplacian5": lambda k: k.laplacian5(x),
            "extrapolate": lambda k: k.extrapolate(x, xp, 0.7),
            "step_stats": lambda k: k.step_stats(x, xp, zp),
            "weighted_energy": lambda k: k.weighted_energy(m, r),
        }
        for name, fn in cases.items():
            row = {"size": n, "kernel": name}
            for label, impl in impls.items():
                if impl is None:
                    row[label] = float("nan")
                    continue
                fn(impl)  # compile / warm caches
                t = timeit.Timer(lambda: fn(impl))
                loops, _ = t.autorange()
                row[label] = min(t.repeat(repeat, loops)) / loops
            rows.append(row)
    return rows


def end_to_end(sizes, trials):
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, SPARSE_SMOOTH_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, "-c", END_TO_END, json.dumps(sizes), str(trials)],
            env=env, capture_output=True, text=True, check=True,
        )
        data = json.loads(proc.stdout.strip().splitlines()[-1])
        results[data["backend"]] = data["rows"]
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128")
    ap.add_argument("--trials", type=int, default=5)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    print("kernel micro-benchmarks (seconds per call)")
    print(f"{'size':>5} {'kernel':<16} {'numpy':>11} {'numba':>11} {'speedup':>8}")
    for r in kernel_table(sizes):
        print(f"{r['size']:>5} {r['kernel']:<16} {r['numpy']:>11.3e} {r['numba']:>11.3e} {r['numpy'] / r['numba']:>8.2f}")

    print("\nend-to-end solver median wall time (seconds)")
    res = end_to_end(sizes, args.trials)
    backends = sorted(res)
    print(f"{'size':>5} {'method':<10} " + " ".join(f"{b:>10}" for b in backends))
    keyed = {b: {(r["size"], r["method"]): r["median_seconds"] for r in rows} for b, rows in res.items()}
    for n in sizes:
        for m in ("decoupled", "coupled"):
            print(f"{n:>5} {m:<10} " + " ".join(f"{keyed[b][(n, m)]:>10.4f}" for b in backends))


if __name__ == "__main__":
    main()
