"""Fourier sampling operator and periodic Laplacian on n x n images.

Conventions
-----------
* Images are real ``float64`` arrays of shape ``(n, n)``; ``N = n**2``.
* ``dft2`` is the unnormalized 2-D DFT, so ``F^H F = N * I``.
* The forward operator samples the spectrum on a conjugate-symmetric index
  set. Because inputs are real, every measurement it produces is
  hermitian-consistent, and on that subspace ``A A^H = N * I`` holds exactly.
* ``adjoint`` is the adjoint for the real inner product
  ``<z1, z2> = Re(z1^H z2)`` on measurements.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import _kernels

__all__ = [
    "SamplingPattern",
    "Measurement",
    "as_image",
    "dft2",
    "forward",
    "adjoint",
    "laplacian_apply",
    "laplacian_symbol",
    "laplacian_kernel",
    "materialize_dense",
    "DENSE_MAX_N",
]

DENSE_MAX_N = 32


def as_image(x, n=None):
    """Validate and return ``x`` as a C-contiguous float64 ``(n, n)`` array."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"image must be a non-empty square 2-D array, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"image side {arr.shape[0]} does not match n={n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """Ordered, conjugate-symmetric set of 2-D frequency indices.

    Parameters
    ----------
    n : int
        Image side length.
    indices : array_like of shape (L, 2)
        Frequency pairs ``(k, l)`` with ``0 <= k, l < n``.
    require_dc : bool
        When true (the default) the pattern must contain ``(0, 0)``.
        Only the assumption-violation checks build patterns without it.
    """

    n: int
    indices: np.ndarray
    require_dc: bool = True
    flat: np.ndarray = field(init=False, repr=False)
    mirror: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("n must be positive")
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, 2)
        if idx.shape[0] == 0:
            raise ValueError("pattern must contain at least one index")
        if np.any(idx < 0) or np.any(idx >= n):
            raise ValueError(f"indices must lie in [0, {n})")
        flat = idx[:, 0] * n + idx[:, 1]
        if np.unique(flat).size != flat.size:
            raise ValueError("pattern contains duplicate indices")
        if self.require_dc and not np.any(flat == 0):
            raise ValueError("pattern must contain the DC index (0, 0)")

        mirror_flat = ((-idx[:, 0]) % n) * n + (-idx[:, 1]) % n
        position = np.full(n * n, -1, dtype=np.int64)
        position[flat] = np.arange(flat.size)
        mirror = position[mirror_flat]
        if np.any(mirror < 0):
            raise ValueError("pattern is not closed under conjugate mirroring")

        idx.setflags(write=False)
        flat.setflags(write=False)
        mirror.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "mirror", mirror)

        # half-spectrum (rfft2 layout) gather/scatter tables
        h = n // 2 + 1
        k, l = idx[:, 0], idx[:, 1]
        conj = l >= h
        hk = np.where(conj, (-k) % n, k)
        hl = np.where(conj, (-l) % n, l)
        object.__setattr__(self, "_half_flat", hk * h + hl)
        object.__setattr__(self, "_conj", conj)
        object.__setattr__(self, "_in_half", ~conj)

    @property
    def L(self):
        return int(self.flat.size)

    @property
    def N(self):
        return self.n * self.n

    @property
    def self_mirrored(self):
        """Boolean mask of indices that are their own conjugate mirror."""
        return self.mirror == np.arange(self.L)

    def has_dc(self):
        return bool(np.any(self.flat == 0))

    def without_dc(self):
        """Copy of the pattern with ``(0, 0)`` removed (assumption-violation tests)."""
        keep = self.flat != 0
        return SamplingPattern(self.n, self.indices[keep], require_dc=False)

    def __eq__(self, other):
        if not isinstance(other, SamplingPattern):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))


@dataclass(frozen=True, eq=False)
class Measurement:
    """Complex samples ``values[j]`` of a spectrum at ``pattern.indices[j]``."""

    pattern: SamplingPattern
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128).reshape(-1)
        if v.size != self.pattern.L:
            raise ValueError(f"measurement has {v.size} values, pattern has {self.pattern.L}")
        if not np.all(np.isfinite(v)):
            raise ValueError("measurement contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def hermitian_defect(self):
        """Largest violation of ``v[mirror] == conj(v)``, relative to ``max |v|``."""
        v = self.values
        scale = np.max(np.abs(v)) if v.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(v[self.pattern.mirror] - np.conj(v))) / scale)

    def is_hermitian(self, rtol=1e-9):
        return self.hermitian_defect() <= rtol

    def __add__(self, other):
        _check_aligned(self.pattern, other)
        return Measurement(self.pattern, self.values + other.values)

    def __sub__(self, other):
        _check_aligned(self.pattern, other)
        return Measurement(self.pattern, self.values - other.values)

    def scaled(self, c):
        return Measurement(self.pattern, c * self.values)

    def norm_sq(self):
        v = self.values
        return float(np.sum(v.real**2 + v.imag**2))


def _check_aligned(pattern, meas):
    if meas.pattern is not pattern and meas.pattern != pattern:
        raise ValueError("measurement is not aligned with the sampling pattern")


def dft2(image):
    """Unnormalized 2-D DFT of a real image (complex ``(n, n)`` array)."""
    return sfft.fft2(as_image(image))


def _forward_values(pattern, x):
    half = sfft.rfft2(x).reshape(-1)
    v = half[pattern._half_flat]
    return np.where(pattern._conj, np.conj(v), v)


def forward(pattern, image):
    """Sample the spectrum of ``image`` on ``pattern``.

    Returns a :class:`Measurement`; for real input and a symmetric pattern the
    result is hermitian-consistent.
    """
    x = as_image(image, pattern.n)
    return Measurement(pattern, _forward_values(pattern, x))


def _adjoint_values(pattern, z):
    n = pattern.n
    # Re(F^H S^T z) equals F^H applied to the hermitian part of the zero-filled spectrum
    zh = 0.5 * (z + np.conj(z[pattern.mirror]))
    h = n // 2 + 1
    grid = np.zeros(n * h, dtype=np.complex128)
    grid[pattern._half_flat[pattern._in_half]] = zh[pattern._in_half]
    return (n * n) * sfft.irfft2(grid.reshape(n, h), s=(n, n))


def adjoint(pattern, meas):
    """Real-inner-product adjoint of :func:`forward`.

    Satisfies ``Re(vdot(forward(x), y)) == vdot(x, adjoint(y))`` for every
    real image ``x`` and every complex ``y`` aligned with ``pattern``.
    """
    _check_aligned(pattern, meas)
    return _adjoint_values(pattern, meas.values)


def _require_stencil_size(n):
    if n < 3:
        raise ValueError(f"the 5-point periodic Laplacian needs n >= 3, got n={n}")


def laplacian_apply(image):
    """Periodic 5-point Laplacian, ``[[0,1,0],[1,-4,1],[0,1,0]]`` with wrap-around."""
    x = as_image(image)
    _require_stencil_size(x.shape[0])
    return _kernels.laplacian5(x)


def laplacian_kernel(n):
    """The Laplacian stencil as an ``(n, n)`` image centred at pixel (0, 0)."""
    _require_stencil_size(n)
    d = np.zeros((n, n))
    d[0, 0] = -4.0
    d[1, 0] = d[-1, 0] = d[0, 1] = d[0, -1] = 1.0
    return d


def laplacian_symbol(n):
    """Fourier symbol ``2cos(2 pi k/n) + 2cos(2 pi l/n) - 4`` of the periodic Laplacian."""
    _require_stencil_size(n)
    k = np.arange(n)
    # fold onto min(k, n - k) so mirrored frequencies get bit-identical values
    c = 2.0 * np.cos(2.0 * np.pi * np.minimum(k, n - k) / n)
    return c[:, None] + c[None, :] - 4.0


def materialize_dense(pattern):
    """Real-linear dense matrix of the forward operator.

    Returns ``D`` of shape ``(2L, N)`` with
    ``D @ x.ravel() == concatenate([forward(x).real, forward(x).imag])``.
    Only for oracle use: guarded to ``n <= 32``.
    """
    n = pattern.n
    if n > DENSE_MAX_N:
        raise ValueError(f"dense materialization is limited to n <= {DENSE_MAX_N}")
    p = np.arange(n)
    k = pattern.indices[:, 0]
    l = pattern.indices[:, 1]
    phase = 2.0 * np.pi * (
        np.multiply.outer(k, p)[:, :, None] + np.multiply.outer(l, p)[:, None, :]
    ) / n
    phase = phase.reshape(pattern.L, n * n)
    return np.vstack([np.cos(phase), -np.sin(phase)])
