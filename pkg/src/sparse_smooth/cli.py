"""Command-line entry point: ``simulate | solve | bench | check``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
3 a ``check`` assertion failed.
"""

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio
from .metrics import DEFAULT_RHO, evaluate
from .operators import forward
from .reference import (
    DenseProblem,
    basis_sources,
    check_assumption1,
    check_assumption2,
    check_assumption3,
    dense_m_matrix,
    dense_smooth_solve,
    lemma1_residual,
    real_coordinates,
)
from .representer import build_weights, solve_smooth_closed_form
from .simulate import GroundTruth, add_noise, child_seeds, default_scene, gen_pattern, gen_scene
from .solvers import (
    DivergenceError,
    ProblemInstance,
    SolverConfig,
    composite_objective,
    solve_coupled,
    solve_decoupled,
)
from .tuning import lambda1_from_alpha, lambda2_from_alpha

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3

SOLVERS = {"coupled": solve_coupled, "decoupled": solve_decoupled}
CHECK_MAX_N = 16


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# --------------------------------------------------------------------------
# instance construction shared by simulate and bench
# --------------------------------------------------------------------------
def simulate_instance(n, seed, fraction=0.3, psnr=20.0, sigma_freq=None, **scene):
    """Ground truth, pattern and noisy data for one master seed."""
    s_scene, s_pattern, s_noise = child_seeds(seed)
    truth = gen_scene(default_scene(n, seed=s_scene, **scene))
    pattern = gen_pattern(n, fraction, sigma_freq=sigma_freq, seed=s_pattern)
    y = add_noise(forward(pattern, truth.x_true), psnr, seed=s_noise)
    return truth, pattern, y


def make_instance(pattern, y, alpha1, alpha2, lambda1=None, lambda2=None):
    lam2 = lambda2 if lambda2 is not None else lambda2_from_alpha(alpha2, pattern.n)
    lam1 = lambda1 if lambda1 is not None else lambda1_from_alpha(alpha1, pattern, lam2, y)
    return ProblemInstance(pattern, y, lam1, lam2)


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------
def cmd_simulate(args):
    scene = {}
    for key in ("k_spikes", "spike_amp", "n_blobs", "blob_sigma", "blob_amp"):
        val = getattr(args, key)
        if val is not None:
            scene[key] = tuple(val) if isinstance(val, list) else val
    truth, pattern, y = simulate_instance(
        args.n, args.seed, args.fraction, args.psnr, args.sigma_freq, **scene
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_grid(out / "x1_true.grid", truth.x1_true)
    fileio.write_grid(out / "x2_true.grid", truth.x2_true)
    fileio.write_pattern(out / "pattern.pat", pattern)
    fileio.write_measurement(out / "y.meas", y)
    cfg = default_scene(args.n, **scene)
    manifest = {
        "n": args.n,
        "L": pattern.L,
        "seed": args.seed,
        "fraction": args.fraction,
        "psnr_db": args.psnr,
        "sigma_freq": args.sigma_freq if args.sigma_freq is not None else args.n / 8,
        "k_spikes": cfg.k_spikes,
        "spike_amp": ",".join(map(str, cfg.spike_amp)),
        "n_blobs": cfg.n_blobs,
        "blob_sigma": ",".join(map(str, cfg.blob_sigma)),
        "blob_amp": ",".join(map(str, cfg.blob_amp)),
    }
    fileio.write_keyvalues(out / "manifest.txt", manifest)
    if args.plot:
        fileio.write_pgm(out / "x1_true.pgm", truth.x1_true)
        fileio.write_pgm(out / "x2_true.pgm", truth.x2_true)
    print(f"wrote {out} (n={args.n}, L={pattern.L})")
    return EXIT_OK


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------
def _load_truth(src):
    p1, p2 = src / "x1_true.grid", src / "x2_true.grid"
    if not (p1.exists() and p2.exists()):
        return None
    x1, x2 = fileio.read_grid(p1), fileio.read_grid(p2)
    return GroundTruth(x1, x2, frozenset(int(i) for i in np.flatnonzero(x1)))


def cmd_solve(args):
    src = Path(args.input)
    for name in ("pattern.pat", "y.meas"):
        if not (src / name).exists():
            raise UsageError(f"missing input {src / name}")
    pattern = fileio.read_pattern(src / "pattern.pat")
    y = fileio.read_measurement(src / "y.meas", pattern)
    sim = fileio.read_keyvalues(src / "manifest.txt") if (src / "manifest.txt").exists() else {}

    inst = make_instance(pattern, y, args.alpha1, args.alpha2, args.lambda1, args.lambda2)
    cfg = SolverConfig(max_iter=args.max_iter, rel_tol=args.rel_tol)
    result = SOLVERS[args.method](inst, cfg)

    out = Path(args.out) if args.out else src / args.method
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_grid(out / "x1_hat.grid", result.x1)
    fileio.write_grid(out / "x2_hat.grid", result.x2)
    with open(out / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective", "seconds"])
        for k, f, s in result.trace:
            w.writerow([k, repr(f), repr(s)])

    manifest = {
        "n": pattern.n,
        "L": pattern.L,
        "seed": sim.get("seed", ""),
        "fraction": sim.get("fraction", ""),
        "psnr_db": sim.get("psnr_db", ""),
        "alpha1": args.alpha1,
        "alpha2": args.alpha2,
        "lambda1": repr(inst.lambda1),
        "lambda2": repr(inst.lambda2),
        "method": args.method,
        "rel_tol": args.rel_tol,
        "max_iter": args.max_iter,
        "rho": args.rho,
    }
    fileio.write_keyvalues(out / "manifest.txt", manifest)

    report = {
        "status": result.status,
        "iterations": result.iterations,
        "wall_seconds": repr(result.seconds),
        "composite_objective": repr(composite_objective(inst, result.x1, result.x2)),
    }
    truth = _load_truth(src)
    if truth is not None:
        ev = evaluate(result, truth, args.rho)
        report.update(
            jaccard=repr(ev.jaccard),
            rel_l2_smooth=repr(ev.rel_l2_smooth),
            rel_l2_total=repr(ev.rel_l2_total),
        )
    report.update(manifest)
    fileio.write_keyvalues(out / "report.txt", report)
    if args.plot:
        fileio.write_pgm(out / "x1_hat.pgm", result.x1)
        fileio.write_pgm(out / "x2_hat.pgm", result.x2)
    for k in ("status", "iterations", "composite_objective", "jaccard", "rel_l2_smooth"):
        if k in report:
            print(f"{k}={report[k]}")
    return EXIT_OK


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------
def summarize(values):
    """Median and interquartile range (linear interpolation) of a sample."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return float("nan"), float("nan")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return float(med), float(q3 - q1)


def _warm_up():
    # pay JIT compilation before any timed run
    _, pattern, y = simulate_instance(16, 0)
    inst = make_instance(pattern, y, 0.08, 0.5)
    for solve in (solve_coupled, solve_decoupled):
        solve(inst, SolverConfig(max_iter=5))


def run_bench(sizes, trials, seed, alpha1=0.08, alpha2=0.5, fraction=0.3, psnr=20.0,
              cfg=SolverConfig(), parallel=1, methods=("decoupled", "coupled")):
    """Median solver wall time per (size, method). Returns a list of row dicts."""
    _warm_up()
    rows = []
    for n in sizes:
        seeds = [seed + 1000 * n + t for t in range(trials)]

        def build(s, n=n):
            _, pattern, y = simulate_instance(n, s, fraction, psnr)
            return make_instance(pattern, y, alpha1, alpha2)

        # instance generation may overlap; the timed solves never do
        with ThreadPoolExecutor(max_workers=max(1, parallel)) as pool:
            instances = list(pool.map(build, seeds))

        times = {m: [] for m in methods}
        iters = {m: [] for m in methods}
        failed = {m: 0 for m in methods}
        for inst in instances:
            for m in methods:
                t0 = time.perf_counter()
                try:
                    res = SOLVERS[m](inst, cfg)
                except (DivergenceError, np.linalg.LinAlgError, ValueError):
                    failed[m] += 1
                    continue
                times[m].append(time.perf_counter() - t0)
                iters[m].append(res.iterations)
        for m in methods:
            med, iqr = summarize(times[m])
            rows.append(
                dict(
                    size=n,
                    method=m,
                    median_seconds=med,
                    iqr_seconds=iqr,
                    median_iters=float(np.median(iters[m])) if iters[m] else float("nan"),
                    n_failed=failed[m],
                )
            )
    return rows


BENCH_COLUMNS = ["size", "method", "median_seconds", "iqr_seconds", "median_iters", "n_failed"]


def write_bench_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def cmd_bench(args):
    if any(n < 3 for n in args.sizes):
        raise UsageError("sizes must be >= 3")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    cfg = SolverConfig(max_iter=args.max_iter, rel_tol=args.rel_tol)
    rows = run_bench(args.sizes, args.trials, args.seed, args.alpha1, args.alpha2,
                     args.fraction, args.psnr, cfg, args.parallel_trials)
    write_bench_csv(args.out, rows)
    for r in rows:
        print(f"{r['size']:>5} {r['method']:<9} median={r['median_seconds']:.4f}s "
              f"iqr={r['iqr_seconds']:.4f}s iters={r['median_iters']:.0f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# check
# --------------------------------------------------------------------------
def run_checks(n, seed=0, fraction=0.3, lambda2s=(0.1, 1.0, 10.0), drop_dc=False):
    """Dense-oracle checks; returns a list of (name, passed, detail)."""
    pattern = gen_pattern(n, fraction, seed=seed)
    if drop_dc:
        pattern = pattern.without_dc()
    p = DenseProblem.from_pattern(pattern)
    results = []
    a1 = check_assumption1(p)
    a2 = check_assumption2(p)
    results.append(("assumption1_full_row_rank", a1, ""))
    results.append(("assumption2_trivial_kernel_intersection", a2, ""))
    results.append(("assumption3_invariant_subspace", check_assumption3(p) if a1 else False, ""))

    rng = np.random.default_rng(seed)
    src = basis_sources(pattern)
    for lam2 in lambda2s:
        tag = f"lambda2={lam2:g}"
        if not (a1 and a2):
            results.append((f"lemma1_identity[{tag}]", False, "skipped: assumptions violated"))
            continue
        r = lemma1_residual(p, lam2)
        results.append((f"lemma1_identity[{tag}]", r <= 1e-10, f"residual={r:.3e} tol=1e-10"))

        w = build_weights(pattern, lam2)
        m = dense_m_matrix(p, lam2)
        diag_err = np.max(np.abs(np.diag(m) - w.m_diag[src]))
        off = np.max(np.abs(m - np.diag(np.diag(m))))
        ok = diag_err <= 1e-8 * max(1.0, np.max(np.abs(w.m_diag))) and off <= 1e-8
        results.append((f"m_diag_dense_vs_fast[{tag}]", ok,
                        f"diag_err={diag_err:.3e} offdiag={off:.3e} tol=1e-8"))

        x1 = rng.standard_normal((n, n))
        y = forward(pattern, rng.standard_normal((n, n)))
        fast = solve_smooth_closed_form(w, y - forward(pattern, x1))
        dense = dense_smooth_solve(p, lam2, x1.ravel(), real_coordinates(pattern, y))
        err = np.linalg.norm(fast.ravel() - dense) / np.linalg.norm(dense)
        results.append((f"x2_dense_vs_fast[{tag}]", err <= 1e-8, f"rel_err={err:.3e} tol=1e-8"))
    return results


def cmd_check(args):
    if not 3 <= args.n <= CHECK_MAX_N:
        raise UsageError(f"--n must lie in [3, {CHECK_MAX_N}] for the dense checks")
    results = run_checks(args.n, args.seed, args.fraction, args.lambda2, args.drop_dc)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK


# --------------------------------------------------------------------------
def build_parser():
    parser = _Parser(prog="sparse-smooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a scene, sampling pattern and noisy data")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fraction", type=float, default=0.3)
    s.add_argument("--psnr", type=float, default=20.0)
    s.add_argument("--sigma-freq", type=float, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--k-spikes", type=int, default=None)
    s.add_argument("--spike-amp", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    s.add_argument("--n-blobs", type=int, default=None)
    s.add_argument("--blob-sigma", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    s.add_argument("--blob-amp", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    s.add_argument("--plot", action="store_true", help="also write .pgm renderings")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="reconstruct from a simulate directory")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--method", choices=sorted(SOLVERS), default="decoupled")
    s.add_argument("--alpha1", type=float, default=0.08)
    s.add_argument("--alpha2", type=float, default=0.5)
    s.add_argument("--lambda1", type=float, default=None, help="overrides --alpha1")
    s.add_argument("--lambda2", type=float, default=None, help="overrides --alpha2")
    s.add_argument("--rel-tol", type=float, default=1e-6)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--rho", type=float, default=DEFAULT_RHO)
    s.add_argument("--out", default=None, help="default: <in>/<method>")
    s.add_argument("--plot", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bench", help="median wall time of both solvers per image size")
    s.add_argument("--sizes", type=_int_list, default=[32, 64, 128])
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha1", type=float, default=0.08)
    s.add_argument("--alpha2", type=float, default=0.5)
    s.add_argument("--fraction", type=float, default=0.3)
    s.add_argument("--psnr", type=float, default=20.0)
    s.add_argument("--rel-tol", type=float, default=1e-6)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--parallel-trials", type=int, default=1)
    s.add_argument("--out", default="bench.csv")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("check", help="dense-oracle verification of the decoupling identities")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fraction", type=float, default=0.3)
    s.add_argument("--lambda2", type=_float_list, default=[0.1, 1.0, 10.0])
    s.add_argument("--drop-dc", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DivergenceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
