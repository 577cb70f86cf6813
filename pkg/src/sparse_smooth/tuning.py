"""Dimension-free knobs for the two regularization weights.

``lambda1 = alpha1 * lambda1_max`` where ``lambda1_max`` is the smallest weight
giving the all-zero sparse component, and ``lambda2`` balances the largest
squared singular values of the forward and penalty operators:
``lambda2 * smax(Delta)^2 = alpha2 * smax(A)^2``.
"""

from dataclasses import dataclass

import numpy as np

from .operators import _adjoint_values, _check_aligned
from .representer import build_weights

__all__ = [
    "Alphas",
    "SIGMA2_MAX_LAPLACIAN",
    "lambda1_max",
    "lambda2_from_alpha",
    "lambda1_from_alpha",
]

# |dhat| peaks at 8 (k = l = n/2); for odd n this is a slight over-estimate
SIGMA2_MAX_LAPLACIAN = 64.0


@dataclass(frozen=True)
class Alphas:
    alpha1: float = 0.08
    alpha2: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha1 < 1:
            raise ValueError(f"alpha1 must lie in (0, 1), got {self.alpha1}")
        if not self.alpha2 > 0:
            raise ValueError(f"alpha2 must be positive, got {self.alpha2}")


def lambda1_max(pattern, lambda2, y):
    """``||A^H M y||_inf``: above it the weighted LASSO returns zero."""
    _check_aligned(pattern, y)
    w = build_weights(pattern, lambda2)
    return float(np.max(np.abs(_adjoint_values(pattern, w.m_diag * y.values))))


def lambda2_from_alpha(alpha2, n):
    """``alpha2 * n**2 / 64`` (``smax(A)^2 = N`` for orthogonal Fourier rows)."""
    if not alpha2 > 0:
        raise ValueError(f"alpha2 must be positive, got {alpha2}")
    return float(alpha2) * n * n / SIGMA2_MAX_LAPLACIAN


def lambda1_from_alpha(alpha1, pattern, lambda2, y):
    if not 0 < alpha1 < 1:
        raise ValueError(f"alpha1 must lie in (0, 1), got {alpha1}")
    lmax = lambda1_max(pattern, lambda2, y)
    if lmax <= 0.0:
        raise ValueError(
            "lambda1_max is zero: the data has no component the sparse term can fit "
            "(e.g. DC-only or zero measurements); pass lambda1 explicitly instead"
        )
    return float(alpha1) * lmax
