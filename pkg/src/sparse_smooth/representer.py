"""Closed-form decoupling quantities when the cogram and penalty are diagonal.

With ``A = S F`` and ``L2`` the periodic Laplacian, ``A A^H = N I`` and
``(A A^H)^{-1} A L2^T L2 A^H = diag(dhat_I**2)``, so

    M = lam2 * dhat_I**2 / (N + lam2 * dhat_I**2)            (elementwise)
    x2 = A^H [(y - ytilde) / (N + lam2 * dhat_I**2)]

where ``dhat_I`` is the Laplacian symbol restricted to the sampled indices.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .operators import _adjoint_values, _check_aligned, forward, laplacian_symbol

__all__ = [
    "DiagonalWeights",
    "build_weights",
    "weighted_residual_energy",
    "solve_smooth_closed_form",
    "fit_of",
]


@dataclass(frozen=True, eq=False)
class DiagonalWeights:
    """Diagonals of the transported penalty and of the sparse-problem weighting."""

    pattern: object
    lambda2: float
    lambda2_diag: np.ndarray
    m_diag: np.ndarray
    inv_cogram: np.ndarray  # 1 / (N + lam2 * lambda2_diag)

    @property
    def lipschitz(self):
        """Exact ``||A^H diag(m) A||`` on real images: ``N * max(m)``."""
        return self.pattern.N * float(np.max(self.m_diag)) if self.m_diag.size else 0.0


def build_weights(pattern, lambda2):
    """Diagonal weights for ``pattern`` and smoothing strength ``lambda2 > 0``."""
    lambda2 = float(lambda2)
    if not lambda2 > 0.0:
        raise ValueError(f"lambda2 must be positive, got {lambda2}")
    dhat = laplacian_symbol(pattern.n).reshape(-1)[pattern.flat]
    lam_diag = dhat**2
    denom = pattern.N + lambda2 * lam_diag
    m = (lambda2 * lam_diag) / denom
    for a in (lam_diag, m):
        a.setflags(write=False)
    inv = 1.0 / denom
    inv.setflags(write=False)
    return DiagonalWeights(pattern, lambda2, lam_diag, m, inv)


def weighted_residual_energy(w, r):
    """``0.5 * sum_j m_j |r_j|^2``."""
    _check_aligned(w.pattern, r)
    return _kernels.weighted_energy(w.m_diag, r.values)


def solve_smooth_closed_form(w, residual, rtol=1e-9):
    """Unique minimizer of ``0.5||r - A x||^2 + lam2/2 ||Delta x||^2``.

    Raises ``ValueError`` for residuals that are not hermitian-consistent,
    which always points at an upstream bug.
    """
    _check_aligned(w.pattern, residual)
    if not residual.is_hermitian(rtol):
        raise ValueError(
            f"residual is not hermitian-consistent (defect {residual.hermitian_defect():.3e})"
        )
    return _adjoint_values(w.pattern, residual.values * w.inv_cogram)


def fit_of(pattern, x1):
    """Measurement vector ``A x1`` shared by every sparse solution."""
    return forward(pattern, x1)

