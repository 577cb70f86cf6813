import csv
import filecmp
import subprocess
import sys

import numpy as np
import pytest

from sparse_smooth import cli, fileio
from sparse_smooth.operators import forward
from sparse_smooth.simulate import SceneConfig
from sparse_smooth.solvers import DivergenceError


def run(*argv):
    return cli.main([str(a) for a in argv])


def simulate(dirpath, n=16, seed=7, *extra):
    assert run("simulate", "--n", n, "--seed", seed, "--out", dirpath, *extra) == 0
    return dirpath


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors


def test_simulate_outputs_and_determinism(tmp_path):
    a = simulate(tmp_path / "a", 32, 7)
    b = simulate(tmp_path / "b", 32, 7)
    for name in ("x1_true.grid", "x2_true.grid", "pattern.pat", "y.meas", "manifest.txt"):
        assert (a / name).exists()
    assert same_tree(a, b)
    c = simulate(tmp_path / "c", 32, 8)
    assert not same_tree(a, c)


def test_simulate_manifest_size(tmp_path):
    d = simulate(tmp_path / "d", 128, 0, "--fraction", 0.3)
    m = fileio.read_keyvalues(d / "manifest.txt")
    assert abs(int(m["L"]) - 2458) <= 1
    assert m["psnr_db"] == "20.0" and m["fraction"] == "0.3"


def test_simulate_noiseless_limit(tmp_path):
    d = simulate(tmp_path / "d", 16, 3, "--psnr", "1e9")
    p = fileio.read_pattern(d / "pattern.pat")
    y = fileio.read_measurement(d / "y.meas", p)
    x = fileio.read_grid(d / "x1_true.grid") + fileio.read_grid(d / "x2_true.grid")
    np.testing.assert_allclose(y.values, forward(p, x).values, atol=1e-6)


def test_simulate_scene_overrides_and_plot(tmp_path):
    d = simulate(tmp_path / "d", 16, 3, "--k-spikes", 4, "--blob-sigma", 1, 2, "--plot")
    assert np.count_nonzero(fileio.read_grid(d / "x1_true.grid")) == 4
    assert (d / "x1_true.pgm").read_bytes().startswith(b"P5\n16 16\n255\n")
    assert fileio.read_keyvalues(d / "manifest.txt")["blob_sigma"] == "1.0,2.0"


def test_solve_outputs(tmp_path):
    d = simulate(tmp_path / "d")
    assert run("solve", "--in", d, "--method", "decoupled", "--plot") == 0
    out = d / "decoupled"
    for name in ("x1_hat.grid", "x2_hat.grid", "trace.csv", "report.txt", "manifest.txt", "x2_hat.pgm"):
        assert (out / name).exists()
    with open(out / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iteration", "objective", "seconds"] and len(rows) > 2
    rep = fileio.read_keyvalues(out / "report.txt")
    for key in ("jaccard", "rel_l2_smooth", "rel_l2_total", "composite_objective", "lambda1", "lambda2", "rho", "seed"):
        assert key in rep
    man = fileio.read_keyvalues(out / "manifest.txt")
    assert set(man) == {
        "n", "L", "seed", "fraction", "psnr_db", "alpha1", "alpha2",
        "lambda1", "lambda2", "method", "rel_tol", "max_iter", "rho",
    }


def test_solve_methods_agree(tmp_path):
    d = simulate(tmp_path / "d")
    for m in ("decoupled", "coupled"):
        assert run("solve", "--in", d, "--method", m, "--rel-tol", "1e-10", "--max-iter", 100000) == 0
    fa = float(fileio.read_keyvalues(d / "decoupled" / "report.txt")["composite_objective"])
    fb = float(fileio.read_keyvalues(d / "coupled" / "report.txt")["composite_objective"])
    assert abs(fa - fb) <= 1e-5 * abs(fa)


def test_solve_near_threshold_alpha(tmp_path):
    d = simulate(tmp_path / "d")
    assert run("solve", "--in", d, "--alpha1", 0.999, "--rel-tol", 1e-10) == 0
    x1 = fileio.read_grid(d / "decoupled" / "x1_hat.grid")
    assert np.abs(x1).max() <= 1e-2 * np.abs(fileio.read_grid(d / "x1_true.grid")).max()


@pytest.mark.parametrize("method", ["coupled", "decoupled"])
def test_solve_bit_reproducible(tmp_path, method):
    d = simulate(tmp_path / "d")
    assert run("solve", "--in", d, "--method", method, "--out", tmp_path / "r1") == 0
    assert run("solve", "--in", d, "--method", method, "--out", tmp_path / "r2") == 0
    for name in ("x1_hat.grid", "x2_hat.grid", "manifest.txt"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_solve_missing_input(tmp_path, capsys):
    assert run("solve", "--in", tmp_path / "nothing") == 1
    assert "missing" in capsys.readouterr().err


def test_solve_numerical_failure_exit_code(tmp_path, monkeypatch):
    d = simulate(tmp_path / "d")

    def boom(inst, cfg):
        raise DivergenceError("iterates became non-finite")

    monkeypatch.setitem(cli.SOLVERS, "decoupled", boom)
    assert run("solve", "--in", d) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        run("frobnicate")
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        run("simulate", "--n", "abc", "--out", "x")
    assert e.value.code == 1
    assert run("check", "--n", 32) == 1


def test_invalid_values_exit_1(tmp_path):
    assert run("simulate", "--n", 8, "--fraction", 2.0, "--out", tmp_path / "x") == 1


def test_summarize_known_values():
    med, iqr = cli.summarize([1.0, 2.0, 3.0, 4.0, 100.0])
    assert med == 3.0 and iqr == 2.0
    med, iqr = cli.summarize([])
    assert np.isnan(med) and np.isnan(iqr)


def test_bench_rows(tmp_path):
    out = tmp_path / "bench.csv"
    assert run("bench", "--sizes", "32,64", "--trials", 3, "--out", out, "--parallel-trials", 2) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert {(r["size"], r["method"]) for r in rows} == {
        ("32", "decoupled"), ("32", "coupled"), ("64", "decoupled"), ("64", "coupled")
    }
    assert list(rows[0]) == ["size", "method", "median_seconds", "iqr_seconds", "median_iters", "n_failed"]
    for size in ("32", "64"):
        t = {r["method"]: float(r["median_seconds"]) for r in rows if r["size"] == size}
        assert t["decoupled"] <= t["coupled"]


def test_bench_failures_are_recorded(monkeypatch):
    def boom(inst, cfg):
        raise DivergenceError("bad step")

    monkeypatch.setitem(cli.SOLVERS, "coupled", boom)
    rows = cli.run_bench([16], 2, 0)
    bad = [r for r in rows if r["method"] == "coupled"][0]
    assert bad["n_failed"] == 2 and np.isnan(bad["median_seconds"])
    good = [r for r in rows if r["method"] == "decoupled"][0]
    assert good["n_failed"] == 0


def test_check_passes_and_fails(capsys):
    assert run("check", "--n", 8) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(ln.startswith("PASS") for ln in lines)
    assert run("check", "--n", 8, "--drop-dc") == 3
    out = capsys.readouterr().out
    assert "FAIL assumption2" in out


def test_check_identity_sweep_n4(capsys):
    assert run("check", "--n", 4, "--lambda2", "0.1,1,10") == 0
    rows = [ln for ln in capsys.readouterr().out.splitlines() if "lemma1" in ln]
    assert len(rows) == 3
    for ln in rows:
        residual = float(ln.split("residual=")[1].split()[0])
        assert residual <= 1e-10


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "sparse_smooth", "check", "--n", "6"], capture_output=True, text=True
    )
    assert res.returncode == 0, res.stderr
