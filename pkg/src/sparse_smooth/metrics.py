"""Support recovery and reconstruction-error metrics."""

from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["EvalReport", "support_of", "jaccard", "relative_l2", "evaluate", "DEFAULT_RHO"]

DEFAULT_RHO = 0.05


@dataclass(frozen=True)
class EvalReport:
    jaccard: float
    rel_l2_smooth: float
    rel_l2_total: float
    wall_seconds: float
    iterations: int
    rho: float = DEFAULT_RHO

    def as_dict(self):
        return asdict(self)


def support_of(x, rho=DEFAULT_RHO):
    """Flat indices of pixels with ``|x_i| > rho * max|x|``; empty for the zero image."""
    a = np.abs(np.asarray(x, dtype=np.float64)).ravel()
    peak = a.max() if a.size else 0.0
    if peak == 0.0:
        return frozenset()
    return frozenset(int(i) for i in np.flatnonzero(a > rho * peak))


def jaccard(s1, s2):
    s1, s2 = set(s1), set(s2)
    union = s1 | s2
    if not union:
        return 1.0
    return len(s1 & s2) / len(union)


def relative_l2(x_est, x_ref):
    x_ref = np.asarray(x_ref, dtype=np.float64)
    ref = np.linalg.norm(x_ref)
    if ref == 0.0:
        raise ValueError("relative error against a zero reference is undefined")
    return float(np.linalg.norm(np.asarray(x_est, dtype=np.float64) - x_ref) / ref)


def evaluate(result, truth, rho=DEFAULT_RHO):
    """Compare a solve result with the ground truth it was simulated from."""
    if result.x1.shape != truth.x1_true.shape:
        raise ValueError(f"size mismatch: {result.x1.shape} vs {truth.x1_true.shape}")
    return EvalReport(
        jaccard=jaccard(support_of(result.x1, rho), truth.support_true),
        rel_l2_smooth=relative_l2(result.x2, truth.x2_true),
        rel_l2_total=relative_l2(result.x1 + result.x2, truth.x_true),
        wall_seconds=float(result.seconds),
        iterations=int(result.iterations),
        rho=float(rho),
    )
