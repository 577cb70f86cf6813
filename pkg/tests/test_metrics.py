import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparse_smooth.metrics import EvalReport, evaluate, jaccard, relative_l2, support_of
from sparse_smooth.simulate import default_scene, gen_scene
from sparse_smooth.solvers import SolveResult

index_sets = st.frozensets(st.integers(0, 30), max_size=12)


def test_support_examples():
    assert support_of(np.zeros((4, 4))) == frozenset()
    x = np.zeros((4, 4))
    x[1, 2] = -3.0
    for rho in (0.01, 0.5, 0.99):
        assert support_of(x, rho) == {6}
    x[0, 0] = 10.0
    x[1, 2] = 1.0
    assert support_of(x, 0.5) == {0}


def test_jaccard_examples():
    assert jaccard({1, 2}, {1, 2}) == 1.0
    assert jaccard({1}, {2}) == 0.0
    assert jaccard({1, 2, 3}, {2, 3, 4}) == 0.5
    assert jaccard(set(), set()) == 1.0


@given(index_sets, index_sets)
def test_jaccard_properties(a, b):
    j = jaccard(a, b)
    assert 0.0 <= j <= 1.0
    assert j == jaccard(b, a)
    assert (j == 1.0) == (a == b)


def test_relative_l2_examples():
    x = np.arange(1.0, 10.0).reshape(3, 3)
    assert relative_l2(x, x) == 0.0
    assert relative_l2(np.zeros_like(x), x) == 1.0
    assert relative_l2(2 * x, x) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relative_l2(x, np.zeros_like(x))


@given(st.integers(0, 2**32 - 1))
def test_relative_l2_triangle_bound(seed):
    a, b, c = np.random.default_rng(seed).standard_normal((3, 5, 5))
    bound = (np.linalg.norm(a - b) + np.linalg.norm(b - c)) / np.linalg.norm(c)
    assert relative_l2(a, c) <= bound + 1e-12


def _result(x1, x2):
    return SolveResult(x1=x1, x2=x2, fit=None, trace=[(7, 0.0, 0.5)], seconds=0.5)


def test_evaluate_exact_and_zero():
    t = gen_scene(default_scene(16, seed=0, k_spikes=4))
    rep = evaluate(_result(t.x1_true, t.x2_true), t)
    assert rep.jaccard == 1.0 and rep.rel_l2_smooth == 0.0 and rep.rel_l2_total == 0.0
    assert rep.iterations == 7 and rep.wall_seconds == 0.5 and rep.rho == 0.05
    z = np.zeros((16, 16))
    rep = evaluate(_result(z, z), t)
    assert rep.jaccard == 0.0 and rep.rel_l2_smooth == 1.0 and rep.rel_l2_total == 1.0


def test_evaluate_size_mismatch():
    t = gen_scene(default_scene(16, seed=0))
    with pytest.raises(ValueError):
        evaluate(_result(np.zeros((8, 8)), np.zeros((8, 8))), t)


def test_report_as_dict():
    d = EvalReport(0.5, 0.1, 0.2, 1.0, 3).as_dict()
    assert d == dict(jaccard=0.5, rel_l2_smooth=0.1, rel_l2_total=0.2, wall_seconds=1.0, iterations=3, rho=0.05)
