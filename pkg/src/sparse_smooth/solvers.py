"""Accelerated proximal gradient and the coupled / decoupled composite solvers.

Both drivers minimize

    0.5 ||y - A(x1 + x2)||^2 + lam1 ||x1||_1 + lam2/2 ||Delta x2||^2

over real n x n images. ``solve_coupled`` runs APGD on the stacked pair.
``solve_decoupled`` runs APGD on the weighted LASSO in ``x1`` alone and then
reads ``x2`` off in closed form from the fitted measurements.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .operators import (
    Measurement,
    _adjoint_values,
    _check_aligned,
    _forward_values,
    as_image,
    forward,
)
from .representer import build_weights, solve_smooth_closed_form

__all__ = [
    "DivergenceError",
    "SolverConfig",
    "ProblemInstance",
    "SolveResult",
    "soft_threshold",
    "power_iteration",
    "apgd",
    "CoupledSmooth",
    "WeightedSmooth",
    "composite_objective",
    "p1_objective",
    "coupled_lipschitz",
    "solve_coupled",
    "solve_decoupled",
]

CONVERGED = "converged"
MAX_ITER = "max-iter-reached"

# power iteration approaches the top eigenvalue from below
_LIPSCHITZ_MARGIN = 1.001


class DivergenceError(FloatingPointError):
    """The iterates or the objective became non-finite (step size too large)."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and step policy shared by both drivers.

    ``trace_every`` controls how often the (extra-cost) objective is logged;
    the final iterate is always logged.
    """

    max_iter: int = 10000
    rel_tol: float = 1e-6
    step_safety: float = 1.0
    restart: bool = True
    trace_every: int = 1

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be a positive integer")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not 0 < self.step_safety <= 1:
            raise ValueError("step_safety must lie in (0, 1]")
        if int(self.trace_every) < 1:
            raise ValueError("trace_every must be a positive integer")


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Sampling pattern, hermitian-consistent data and the two penalty weights."""

    pattern: object
    y: Measurement
    lambda1: float
    lambda2: float

    def __post_init__(self):
        _check_aligned(self.pattern, self.y)
        if not self.lambda1 > 0:
            raise ValueError(f"lambda1 must be positive, got {self.lambda1}")
        if not self.lambda2 > 0:
            raise ValueError(f"lambda2 must be positive, got {self.lambda2}")
        if not self.y.is_hermitian():
            raise ValueError("measurement is not hermitian-consistent with a real image")
        object.__setattr__(self, "lambda1", float(self.lambda1))
        object.__setattr__(self, "lambda2", float(self.lambda2))

    @property
    def n(self):
        return self.pattern.n


@dataclass(eq=False)
class SolveResult:
    x1: np.ndarray
    x2: np.ndarray
    fit: Measurement
    trace: list = field(default_factory=list)  # (iteration, objective, seconds)
    status: str = CONVERGED
    seconds: float = 0.0

    @property
    def iterations(self):
        return self.trace[-1][0] if self.trace else 0

    @property
    def converged(self):
        return self.status == CONVERGED


def soft_threshold(v, tau):
    """Proximal map of ``tau * ||.||_1``: ``sign(v) * max(|v| - tau, 0)``."""
    if tau < 0:
        raise ValueError("threshold must be non-negative")
    return _kernels.soft_threshold(np.asarray(v, dtype=np.float64), tau)


def power_iteration(op, shape, iters=500, tol=1e-6, seed=0):
    """Largest eigenvalue of a symmetric PSD map ``op`` acting on arrays of ``shape``.

    Returns the Rayleigh quotient once two consecutive estimates agree to
    relative ``tol``, or after ``iters`` applications. A map that sends the
    probe to zero gives 0.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(shape)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(int(iters)):
        w = op(v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        rayleigh = float(np.vdot(v, w))
        v = w / nrm
        if abs(rayleigh - estimate) <= tol * abs(rayleigh):
            return rayleigh
        estimate = rayleigh
    return estimate


def apgd(grad, prox, step, x0, cfg=SolverConfig(), objective=None):
    """FISTA with optional gradient-based adaptive restart.

    Parameters
    ----------
    grad : callable
        Gradient of the smooth term.
    prox : callable
        ``prox(v, step)``, proximal map of ``step`` times the non-smooth term.
    step : float
        Step size, at most ``1 / Lipschitz(grad)``.
    x0 : ndarray
        Starting point (not modified).
    cfg : SolverConfig
    objective : callable, optional
        Full objective; logged every ``cfg.trace_every`` iterations.

    Returns
    -------
    x : ndarray
    trace : list of (iteration, objective, seconds)
        ``objective`` is ``nan`` when no objective callable was given.
    status : str
        ``"converged"`` or ``"max-iter-reached"``.

    Notes
    -----
    Momentum is reset (``t = 1``) whenever ``<z_prev - x_k, x_k - x_prev> > 0``,
    i.e. the last step moved against the negative gradient mapping.
    Stops when ``||x_k - x_{k-1}|| / max(||x_k||, tiny) < rel_tol``.
    """
    if not step > 0 or not math.isfinite(step):
        raise ValueError(f"step must be positive and finite, got {step}")
    tiny = np.finfo(np.float64).tiny
    x_prev = np.array(x0, dtype=np.float64)
    z = x_prev.copy()
    t = 1.0
    trace = []
    status = MAX_ITER
    t0 = time.perf_counter()

    def log(k, x):
        f = float(objective(x)) if objective is not None else float("nan")
        if objective is not None and not math.isfinite(f):
            raise DivergenceError(f"objective became non-finite at iteration {k}")
        trace.append((k, f, time.perf_counter() - t0))

    if objective is not None:
        log(0, x_prev)

    x = x_prev
    for k in range(1, int(cfg.max_iter) + 1):
        x = prox(z - step * grad(z), step)
        dot, dsq, xsq = _kernels.step_stats(x, x_prev, z)
        if not (math.isfinite(dsq) and math.isfinite(xsq)):
            raise DivergenceError(f"iterates became non-finite at iteration {k}")
        rel = math.sqrt(dsq) / max(math.sqrt(xsq), tiny)
        done = rel < cfg.rel_tol
        if done or k == cfg.max_iter or k % cfg.trace_every == 0:
            log(k, x)
        if done:
            status = CONVERGED
            break
        if cfg.restart and dot > 0.0:
            t = 1.0
            z = x
        else:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            z = _kernels.extrapolate(x, x_prev, (t - 1.0) / t_next)
            t = t_next
        x_prev = x
    return x, trace, status


class CoupledSmooth:
    """``0.5||y - A(x1 + x2)||^2 + lam2/2 ||Delta x2||^2`` on a stacked ``(2, n, n)`` array."""

    def __init__(self, inst):
        self.pattern = inst.pattern
        self.y = inst.y.values
        self.lambda2 = inst.lambda2

    def __call__(self, xs):
        r = _forward_values(self.pattern, xs[0] + xs[1]) - self.y
        lx2 = _kernels.laplacian5(xs[1])
        return 0.5 * float(np.sum(r.real**2 + r.imag**2)) + 0.5 * self.lambda2 * float(
            np.vdot(lx2, lx2)
        )

    def _normal(self, xs, y):
        g = _adjoint_values(self.pattern, _forward_values(self.pattern, xs[0] + xs[1]) - y)
        out = np.empty_like(xs)
        out[0] = g
        out[1] = g + self.lambda2 * _kernels.laplacian5(_kernels.laplacian5(xs[1]))
        return out

    def grad(self, xs):
        return self._normal(xs, self.y)

    def hessian_apply(self, vs):
        return self._normal(vs, 0.0)


class WeightedSmooth:
    """``0.5 (y - A x)^H M (y - A x)`` with diagonal ``M``."""

    def __init__(self, inst, weights):
        self.pattern = inst.pattern
        self.y = inst.y.values
        self.m = weights.m_diag

    def __call__(self, x):
        r = _forward_values(self.pattern, x) - self.y
        return _kernels.weighted_energy(self.m, r)

    def grad(self, x):
        r = _forward_values(self.pattern, x) - self.y
        return _adjoint_values(self.pattern, self.m * r)


def composite_objective(inst, x1, x2):
    """Full coupled objective, with the complex modulus on the data term."""
    x1 = as_image(x1, inst.n)
    x2 = as_image(x2, inst.n)
    smooth = CoupledSmooth(inst)(np.stack([x1, x2]))
    return smooth + inst.lambda1 * float(np.sum(np.abs(x1)))


def p1_objective(inst, weights, x1):
    """Weighted-LASSO objective of the sparse subproblem."""
    x1 = as_image(x1, inst.n)
    return WeightedSmooth(inst, weights)(x1) + inst.lambda1 * float(np.sum(np.abs(x1)))


def _start(x0, shape):
    if x0 is None:
        return np.zeros(shape)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != shape:
        raise ValueError(f"x0 has shape {x0.shape}, expected {shape}")
    return x0


def coupled_lipschitz(inst, tol=1e-6, iters=500):
    """Power-iteration estimate of the largest Hessian eigenvalue of the coupled smooth term."""
    f = CoupledSmooth(inst)
    return power_iteration(f.hessian_apply, (2, inst.n, inst.n), iters=iters, tol=tol)


def solve_coupled(inst, cfg=SolverConfig(), x0=None):
    """Minimize the composite objective over the stacked pair ``(x1, x2)``."""
    n = inst.n
    t0 = time.perf_counter()
    f = CoupledSmooth(inst)
    lip = coupled_lipschitz(inst)
    step = cfg.step_safety / (lip * _LIPSCHITZ_MARGIN) if lip > 0 else 1.0
    lam1 = inst.lambda1

    def prox(v, s):
        out = v.copy()
        out[0] = _kernels.soft_threshold(v[0], s * lam1)
        return out

    def objective(xs):
        return f(xs) + lam1 * float(np.sum(np.abs(xs[0])))

    xs, trace, status = apgd(f.grad, prox, step, _start(x0, (2, n, n)), cfg, objective)
    x1 = np.ascontiguousarray(xs[0])
    x2 = np.ascontiguousarray(xs[1])
    return SolveResult(
        x1=x1,
        x2=x2,
        fit=forward(inst.pattern, x1),
        trace=trace,
        status=status,
        seconds=time.perf_counter() - t0,
    )


def solve_decoupled(inst, cfg=SolverConfig(), x0=None):
    """Weighted LASSO for ``x1``, then the closed-form smooth component."""
    n = inst.n
    t0 = time.perf_counter()
    w = build_weights(inst.pattern, inst.lambda2)
    f = WeightedSmooth(inst, w)
    lip = w.lipschitz
    step = cfg.step_safety / lip if lip > 0 else 1.0
    lam1 = inst.lambda1

    def prox(v, s):
        return _kernels.soft_threshold(v, s * lam1)

    def objective(x):
        return f(x) + lam1 * float(np.sum(np.abs(x)))

    x1, trace, status = apgd(f.grad, prox, step, _start(x0, (n, n)), cfg, objective)
    fit = forward(inst.pattern, x1)
    x2 = solve_smooth_closed_form(w, inst.y - fit)
    return SolveResult(
        x1=x1,
        x2=x2,
        fit=fit,
        trace=trace,
        status=status,
        seconds=time.perf_counter() - t0,
    )
