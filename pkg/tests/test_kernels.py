import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparse_smooth import _kernels

pytestmark = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba unavailable")

reals = st.floats(-1e6, 1e6)
images = st.integers(3, 12).flatmap(lambda n: arrays(np.float64, (n, n), elements=reals))


@given(images, st.floats(0, 1e3))
def test_soft_threshold_parity(x, tau):
    np.testing.assert_array_equal(
        _kernels.numba_impl.soft_threshold(x, tau), _kernels.numpy_impl.soft_threshold(x, tau)
    )


@given(images)
def test_laplacian_parity(x):
    np.testing.assert_allclose(
        _kernels.numba_impl.laplacian5(x), _kernels.numpy_impl.laplacian5(x), rtol=1e-12, atol=1e-6
    )


@given(images, st.floats(0, 1))
def test_extrapolate_and_stats_parity(x, beta):
    rng = np.random.default_rng(0)
    xp = x + rng.standard_normal(x.shape)
    zp = x + rng.standard_normal(x.shape)
    np.testing.assert_allclose(
        _kernels.numba_impl.extrapolate(x, xp, beta), _kernels.numpy_impl.extrapolate(x, xp, beta), rtol=1e-12, atol=1e-9
    )
    np.testing.assert_allclose(
        _kernels.numba_impl.step_stats(x, xp, zp), _kernels.numpy_impl.step_stats(x, xp, zp), rtol=1e-9, atol=1e-6
    )


@given(arrays(np.float64, 17, elements=st.floats(0, 1)), st.integers(0, 2**32 - 1))
def test_weighted_energy_parity(m, seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    assert _kernels.numba_impl.weighted_energy(m, r) == pytest.approx(
        _kernels.numpy_impl.weighted_energy(m, r), rel=1e-12, abs=1e-300
    )


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, SPARSE_SMOOTH_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import sparse_smooth; print(sparse_smooth.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
