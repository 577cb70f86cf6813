"""Elementwise hot loops, compiled with numba when available.

Every kernel exists twice: a plain numpy version and an ``@njit`` version
with identical semantics. The module-level names point at the numba variants
unless numba is missing or ``SPARSE_SMOOTH_DISABLE_NUMBA`` is set to a
non-empty value other than ``0`` before import.

Both variants stay importable (``numpy_impl`` / ``numba_impl``) so the
benchmarks can compare them side by side in one process.
"""

import os
from types import SimpleNamespace

import numpy as np

__all__ = [
    "BACKEND",
    "soft_threshold",
    "laplacian5",
    "extrapolate",
    "step_stats",
    "weighted_energy",
    "numpy_impl",
    "numba_impl",
]


# --------------------------------------------------------------------------
# numpy reference versions
# --------------------------------------------------------------------------
def _soft_threshold_np(v, tau):
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _laplacian5_np(x):
    return (
        np.roll(x, 1, axis=0)
        + np.roll(x, -1, axis=0)
        + np.roll(x, 1, axis=1)
        + np.roll(x, -1, axis=1)
        - 4.0 * x
    )


def _extrapolate_np(x, x_prev, beta):
    return x + beta * (x - x_prev)


def _step_stats_np(x, x_prev, z_prev):
    d = x - x_prev
    return float(np.vdot(z_prev - x, d)), float(np.vdot(d, d)), float(np.vdot(x, x))


def _weighted_energy_np(m, r):
    return 0.5 * float(np.sum(m * (r.real**2 + r.imag**2)))


numpy_impl = SimpleNamespace(
    soft_threshold=_soft_threshold_np,
    laplacian5=_laplacian5_np,
    extrapolate=_extrapolate_np,
    step_stats=_step_stats_np,
    weighted_energy=_weighted_energy_np,
)


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------
def _build_numba():
    from numba import njit

    @njit(cache=True)
    def soft_threshold_flat(v, tau, out):
        for i in range(v.size):
            a = v[i]
            if a > tau:
                out[i] = a - tau
            elif a < -tau:
                out[i] = a + tau
            else:
                out[i] = 0.0

    def soft_threshold(v, tau):
        v = np.ascontiguousarray(v, dtype=np.float64)
        out = np.empty_like(v)
        soft_threshold_flat(v.reshape(-1), float(tau), out.reshape(-1))
        return out

    @njit(cache=True)
    def laplacian5_2d(x, out):
        n0, n1 = x.shape
        for i in range(n0):
            up = i - 1 if i > 0 else n0 - 1
            dn = i + 1 if i < n0 - 1 else 0
            for j in range(n1):
                lf = j - 1 if j > 0 else n1 - 1
                rt = j + 1 if j < n1 - 1 else 0
                out[i, j] = x[up, j] + x[dn, j] + x[i, lf] + x[i, rt] - 4.0 * x[i, j]

    def laplacian5(x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty_like(x)
        laplacian5_2d(x, out)
        return out

    @njit(cache=True)
    def extrapolate_flat(x, x_prev, beta, out):
        for i in range(x.size):
            out[i] = x[i] + beta * (x[i] - x_prev[i])

    def extrapolate(x, x_prev, beta):
        out = np.empty_like(x)
        extrapolate_flat(x.reshape(-1), x_prev.reshape(-1), float(beta), out.reshape(-1))
        return out

    @njit(cache=True)
    def step_stats_flat(x, x_prev, z_prev):
        dot = 0.0
        dsq = 0.0
        xsq = 0.0
        for i in range(x.size):
            d = x[i] - x_prev[i]
            dot += (z_prev[i] - x[i]) * d
            dsq += d * d
            xsq += x[i] * x[i]
        return dot, dsq, xsq

    def step_stats(x, x_prev, z_prev):
        return step_stats_flat(x.reshape(-1), x_prev.reshape(-1), z_prev.reshape(-1))

    @njit(cache=True)
    def weighted_energy_flat(m, r):
        acc = 0.0
        for i in range(m.size):
            acc += m[i] * (r[i].real * r[i].real + r[i].imag * r[i].imag)
        return 0.5 * acc

    def weighted_energy(m, r):
        return weighted_energy_flat(
            np.ascontiguousarray(m, dtype=np.float64),
            np.ascontiguousarray(r, dtype=np.complex128),
        )

    return SimpleNamespace(
        soft_threshold=soft_threshold,
        laplacian5=laplacian5,
        extrapolate=extrapolate,
        step_stats=step_stats,
        weighted_energy=weighted_energy,
    )


def _numba_disabled_by_env():
    return os.environ.get("SPARSE_SMOOTH_DISABLE_NUMBA", "").strip() not in ("", "0")


try:
    numba_impl = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

if numba_impl is None or _numba_disabled_by_env():
    BACKEND = "numpy"
    _active = numpy_impl
else:
    BACKEND = "numba"
    _active = numba_impl

soft_threshold = _active.soft_threshold
laplacian5 = _active.laplacian5
extrapolate = _active.extrapolate
step_stats = _active.step_stats
weighted_energy = _active.weighted_energy
