"""Dense brute-force oracle for small problems.

Everything here forms explicit matrices and calls LAPACK; nothing exploits
structure. It exists to check the fast diagonal path and the decoupling
identities at test scale (``n <= 32``).

The Fourier operator is handled in a real-linear form. ``materialize_dense``
stacks real and imaginary parts (``2L x N``), but mirrored rows of that
matrix are redundant, so it never has full row rank. :func:`hermitian_basis`
gives an orthonormal basis ``Q`` of the hermitian-consistent measurement
subspace; ``Q @ materialize_dense(p)`` is then an ``L x N`` matrix with
``R R^T = N I`` and ``||R x|| == ||forward(x)||`` for every real ``x``.
"""

from dataclasses import dataclass

import numpy as np

from .operators import Measurement, materialize_dense

__all__ = [
    "DenseProblem",
    "hermitian_basis",
    "basis_sources",
    "real_coordinates",
    "measurement_from_real",
    "dense_laplacian",
    "dense_circulant",
    "check_assumption1",
    "check_assumption2",
    "check_assumption3",
    "dense_lambda2",
    "lemma1_residual",
    "dense_smooth_solve",
    "dense_m_matrix",
]

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DenseProblem:
    """Dense forward matrix ``a_mat`` (rows x N) and penalty ``l2_mat`` (M2 x N)."""

    a_mat: np.ndarray
    l2_mat: np.ndarray
    tolerance: float = RANK_TOL

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_mat, dtype=np.float64))
        l2 = np.atleast_2d(np.asarray(self.l2_mat, dtype=np.float64))
        if a.shape[1] != l2.shape[1]:
            raise ValueError(f"column mismatch: A has {a.shape[1]}, L2 has {l2.shape[1]}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "l2_mat", l2)

    @property
    def n_signal(self):
        return self.a_mat.shape[1]

    @classmethod
    def from_pattern(cls, pattern, l2_mat=None, tolerance=RANK_TOL):
        """Real-linear Fourier problem; the penalty defaults to the periodic Laplacian."""
        a = hermitian_basis(pattern) @ materialize_dense(pattern)
        if l2_mat is None:
            l2_mat = dense_laplacian(pattern.n)
        return cls(a, l2_mat, tolerance)


def hermitian_basis(pattern):
    """Orthonormal rows spanning the hermitian-consistent part of ``[Re; Im]`` space.

    Returns ``Q`` of shape ``(L, 2L)``. A self-mirrored index contributes its
    real coordinate; a mirror pair ``(j, j')`` contributes
    ``(e_re_j + e_re_j')/sqrt(2)`` and ``(e_im_j - e_im_j')/sqrt(2)``.
    Rows follow the pattern order, using the first member of each pair.
    """
    L = pattern.L
    mirror = pattern.mirror
    q = np.zeros((L, 2 * L))
    row = 0
    s = 1.0 / np.sqrt(2.0)
    for j in range(L):
        jm = mirror[j]
        if jm == j:
            q[row, j] = 1.0
            row += 1
        elif j < jm:
            q[row, j] = q[row, jm] = s
            q[row + 1, L + j] = s
            q[row + 1, L + jm] = -s
            row += 2
    assert row == L
    return q


def basis_sources(pattern):
    """Pattern position each row of :func:`hermitian_basis` is built from."""
    src = []
    for j in range(pattern.L):
        jm = pattern.mirror[j]
        if jm == j:
            src.append(j)
        elif j < jm:
            src.extend((j, j))
    return np.asarray(src, dtype=np.int64)


def real_coordinates(pattern, meas):
    """Coordinates of a hermitian-consistent measurement in :func:`hermitian_basis`."""
    v = meas.values
    return hermitian_basis(pattern) @ np.concatenate([v.real, v.imag])


def measurement_from_real(pattern, coords):
    """Inverse of :func:`real_coordinates`."""
    stacked = hermitian_basis(pattern).T @ np.asarray(coords, dtype=np.float64)
    L = pattern.L
    return Measurement(pattern, stacked[:L] + 1j * stacked[L:])


def dense_circulant(kernel):
    """Dense matrix of ``x -> kernel (*) x`` (2-D periodic convolution) on row-major images."""
    kernel = np.asarray(kernel, dtype=np.float64)
    n0, n1 = kernel.shape
    p, q = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
    p, q = p.ravel(), q.ravel()
    # out[i] = sum_s kernel[(i - s) mod n] x[s]
    return kernel[(p[:, None] - p[None, :]) % n0, (q[:, None] - q[None, :]) % n1]


def dense_laplacian(n):
    """Periodic 5-point Laplacian as an ``N x N`` matrix; valid for every ``n >= 1``."""
    t = np.zeros((n, n))
    for i in range(n):
        t[i, i] -= 2.0
        t[i, (i + 1) % n] += 1.0
        t[i, (i - 1) % n] += 1.0
    eye = np.eye(n)
    return np.kron(t, eye) + np.kron(eye, t)


def _sigma_ok(mat, tol, need):
    if mat.size == 0:
        raise ValueError("empty matrix")
    if min(mat.shape) < need:
        return False
    s = np.linalg.svd(mat, compute_uv=False)
    return bool(s[need - 1] > tol * s[0])


def check_assumption1(p):
    """Full row rank of the forward matrix."""
    a = p.a_mat
    if a.size == 0:
        raise ValueError("empty forward matrix")
    return _sigma_ok(a, p.tolerance, a.shape[0])


def check_assumption2(p):
    """``ker A`` and ``ker L2`` intersect only at zero."""
    return _sigma_ok(np.vstack([p.a_mat, p.l2_mat]), p.tolerance, p.n_signal)


def _require_a1(p):
    if not check_assumption1(p):
        raise ValueError("forward matrix is not full row rank; A A^T is singular")


def check_assumption3(p):
    """``ker(A)^perp`` is invariant under ``L2^T L2``.

    Checked on ``X = L2^T L2 A^T`` (whose columns span the image of ``ker(A)^perp``):
    ``||(I - P) X|| <= tol * ||X||`` with ``P`` the projector onto ``im(A^T)``.
    """
    _require_a1(p)
    a, l2 = p.a_mat, p.l2_mat
    x = l2.T @ (l2 @ a.T)
    scale = np.linalg.norm(x, 2)
    if scale == 0.0:
        return True
    proj = a.T @ np.linalg.solve(a @ a.T, a @ x)
    return bool(np.linalg.norm(x - proj, 2) <= p.tolerance * scale)


def dense_lambda2(p):
    """``(A A^T)^{-1} A L2^T L2 A^T``."""
    _require_a1(p)
    a, l2 = p.a_mat, p.l2_mat
    return np.linalg.solve(a @ a.T, a @ l2.T @ (l2 @ a.T))


def _require_invertible_inner(p):
    _require_a1(p)
    if not check_assumption2(p):
        raise ValueError("ker A and ker L2 intersect; the inner system is singular")


def _positive(lambda2):
    lambda2 = float(lambda2)
    if not lambda2 > 0:
        raise ValueError(f"lambda2 must be positive, got {lambda2}")
    return lambda2


def lemma1_residual(p, lambda2):
    """Relative spectral-norm gap between the two sides of the decoupling identity.

    ``(A^T A + lam2 L2^T L2)^{-1} A^T`` versus ``A^T (A A^T + lam2 Lambda2)^{-1}``.
    """
    lambda2 = _positive(lambda2)
    _require_invertible_inner(p)
    a, l2 = p.a_mat, p.l2_mat
    u = a.T @ a + lambda2 * (l2.T @ l2)
    lhs = np.linalg.solve(u, a.T)
    inner = a @ a.T + lambda2 * dense_lambda2(p)
    rhs = np.linalg.solve(inner.T, a).T
    return float(np.linalg.norm(lhs - rhs, 2) / np.linalg.norm(rhs, 2))


def dense_smooth_solve(p, lambda2, x1, y):
    """Minimizer over ``x2`` of ``0.5||y - A(x1 + x2)||^2 + lam2/2 ||L2 x2||^2``."""
    lambda2 = _positive(lambda2)
    _require_invertible_inner(p)
    a, l2 = p.a_mat, p.l2_mat
    x1 = np.asarray(x1, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    u = a.T @ a + lambda2 * (l2.T @ l2)
    return np.linalg.solve(u, a.T @ (y - a @ x1))


def dense_m_matrix(p, lambda2):
    """``lam2 Lambda2 (A A^T + lam2 Lambda2)^{-1}``."""
    lambda2 = _positive(lambda2)
    _require_a1(p)
    lam = dense_lambda2(p)
    inner = p.a_mat @ p.a_mat.T + lambda2 * lam
    return np.linalg.solve(inner.T, (lambda2 * lam).T).T
