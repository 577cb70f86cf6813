"""Synthetic sparse-plus-smooth scenes, Fourier sampling patterns and noise.

All randomness comes from ``numpy.random.Generator`` seeded with
``default_rng(seed)`` (PCG64 bit generator), so a fixed seed reproduces the
same draws on every platform with the same numpy major version.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .operators import Measurement, SamplingPattern

_MAX_REDRAWS = 64

__all__ = [
    "SceneConfig",
    "GroundTruth",
    "default_scene",
    "gen_scene",
    "gen_pattern",
    "add_noise",
    "noise_sigma",
    "child_seeds",
]


@dataclass(frozen=True)
class SceneConfig:
    n: int
    k_spikes: int
    spike_amp: tuple = (5.0, 10.0)
    n_blobs: int = 8
    blob_sigma: tuple = (2.0, 8.0)
    blob_amp: tuple = (0.2, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k_spikes < 0 or self.n_blobs < 0:
            raise ValueError("counts must be non-negative")
        if self.k_spikes > self.n * self.n:
            raise ValueError(f"cannot place {self.k_spikes} spikes on {self.n * self.n} pixels")
        for name in ("spike_amp", "blob_sigma", "blob_amp"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise ValueError(f"{name} must be an ordered non-negative range, got {(lo, hi)}")
        if self.blob_sigma[0] <= 0:
            raise ValueError("blob widths must be positive")
        if self.k_spikes and self.n_blobs and self.spike_amp[0] <= self.blob_amp[1]:
            raise ValueError("spike magnitudes must exceed blob magnitudes")


def default_scene(n, seed=0, **overrides):
    """Scene defaults: ~0.2% of pixels are spikes, 8 wide low-intensity blobs."""
    params = dict(
        n=n,
        k_spikes=int(round(0.002 * n * n)),
        spike_amp=(5.0, 10.0),
        n_blobs=8,
        blob_sigma=(n / 16, n / 4),
        blob_amp=(0.2, 1.0),
        seed=seed,
    )
    params.update(overrides)
    return SceneConfig(**params)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    x1_true: np.ndarray
    x2_true: np.ndarray
    support_true: frozenset

    @property
    def x_true(self):
        return self.x1_true + self.x2_true


def _signed_uniform(rng, lo, hi, size):
    mag = rng.uniform(lo, hi, size)
    sign = rng.choice(np.array([-1.0, 1.0]), size)
    return mag * sign


def _wrapped_gauss_1d(n, center, sigma):
    p = np.arange(n)[None, :]
    shifts = n * np.arange(-2, 3)[:, None]
    return np.exp(-((p - center + shifts) ** 2) / (2.0 * sigma**2)).sum(axis=0)


def gen_scene(cfg):
    """Draw spikes and periodic Gaussian blobs; deterministic in ``cfg.seed``."""
    n = cfg.n
    rng = np.random.default_rng(cfg.seed)
    x1 = np.zeros(n * n)
    pos = rng.choice(n * n, size=cfg.k_spikes, replace=False)
    x1[pos] = _signed_uniform(rng, *cfg.spike_amp, cfg.k_spikes)

    x2 = np.zeros((n, n))
    centers = rng.uniform(0, n, size=(cfg.n_blobs, 2))
    sigmas = rng.uniform(*cfg.blob_sigma, cfg.n_blobs)
    amps = _signed_uniform(rng, *cfg.blob_amp, cfg.n_blobs)
    for (ci, cj), s, a in zip(centers, sigmas, amps):
        x2 += a * np.outer(_wrapped_gauss_1d(n, ci, s), _wrapped_gauss_1d(n, cj, s))

    support = frozenset(int(i) for i in np.flatnonzero(x1))
    return GroundTruth(x1.reshape(n, n), x2, support)


def _gaussian_cell_weights(n, sigma):
    """Probability that a rounded N(0, sigma^2) draw lands on each centred index, per axis."""
    c = np.arange(-(n // 2), n - n // 2)
    w = ndtr((c + 0.5) / sigma) - ndtr((c - 0.5) / sigma)
    out = np.empty(n)
    out[c % n] = w
    return out


def gen_pattern(n, fraction=0.3, sigma_freq=None, seed=0):
    """Conjugate-symmetric random frequency set of about ``fraction * n**2 / 2`` indices.

    Base frequencies alternate between a centred discrete Gaussian (std
    ``sigma_freq``, default ``n / 8``) and the uniform distribution on the grid.
    Each accepted base frequency is added together with its mirror, and DC is
    always present. Draws that repeat an existing frequency, or that are their
    own mirror, are redrawn from the same source. The final size is the first
    size reaching the target, hence within one of it.

    When a source keeps colliding (a narrow Gaussian whose core is used up),
    the draw switches to sampling the same distribution restricted to the free
    frequencies, which is what redrawing converges to, so it never stalls.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if sigma_freq is None:
        sigma_freq = n / 8
    if not sigma_freq > 0:
        raise ValueError(f"sigma_freq must be positive, got {sigma_freq}")
    target = int(round(fraction * n * n / 2))
    rng = np.random.default_rng(seed)

    ar = np.arange(n)
    selfm = ((-ar) % n == ar)
    # blocked: taken, or its own mirror (never a base draw)
    blocked = selfm[:, None] & selfm[None, :]
    blocked[0, 0] = True
    order = [(0, 0)]
    free_pairs = (n * n - int(blocked.sum())) // 2
    axis_w = None

    def rejection(gaussian):
        if gaussian:
            k, l = np.rint(rng.normal(0.0, sigma_freq, size=2)).astype(np.int64)
            if not (-(n // 2) <= k < n - n // 2 and -(n // 2) <= l < n - n // 2):
                return None
            return int(k % n), int(l % n)
        k, l = rng.integers(0, n, size=2)
        return int(k), int(l)

    def conditional(gaussian):
        nonlocal axis_w
        free = np.flatnonzero(~blocked.ravel())
        if gaussian:
            if axis_w is None:
                axis_w = _gaussian_cell_weights(n, sigma_freq)
            w = np.outer(axis_w, axis_w).ravel()[free]
            total = w.sum()
            if total > 0:
                return divmod(int(free[rng.choice(free.size, p=w / total)]), n)
        return divmod(int(free[rng.integers(free.size)]), n)

    n_base = 0
    while len(order) < target and n_base < free_pairs:
        gaussian = n_base % 2 == 0
        for _ in range(_MAX_REDRAWS):
            kl = rejection(gaussian)
            if kl is not None and not blocked[kl]:
                break
        else:
            kl = conditional(gaussian)
        k, l = kl
        mk, ml = (-k) % n, (-l) % n
        blocked[k, l] = blocked[mk, ml] = True
        order.extend([(k, l), (mk, ml)])
        n_base += 1
    return SamplingPattern(n, np.array(order, dtype=np.int64))


def noise_sigma(y, psnr_db):
    """Per-component std so that ``10 log10(max|y|^2 / (2 sigma^2)) == psnr_db``."""
    peak = float(np.max(np.abs(y.values)))
    if peak == 0.0:
        raise ValueError("PSNR is undefined for an all-zero measurement")
    return peak * 10.0 ** (-psnr_db / 20.0) / np.sqrt(2.0)


def add_noise(y, psnr_db, seed=0):
    """Complex white Gaussian noise at the given PSNR, mirrored to stay hermitian."""
    if not y.is_hermitian():
        raise ValueError("measurement is not hermitian-consistent")
    sigma = noise_sigma(y, psnr_db)
    pattern = y.pattern
    mirror = pattern.mirror
    idx = np.arange(pattern.L)
    rep = idx[idx <= mirror]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((rep.size, 2))
    e = np.zeros(pattern.L, dtype=np.complex128)
    selfm = mirror[rep] == rep
    e[rep] = sigma * (g[:, 0] + 1j * np.where(selfm, 0.0, g[:, 1]))
    e[mirror[rep]] = np.conj(e[rep])
    return Measurement(pattern, y.values + e)


def child_seeds(seed, k=3):
    """``k`` independent 63-bit seeds derived from one master seed."""
    ss = np.random.SeedSequence(int(seed))
    return [int(c.generate_state(1, np.uint64)[0] >> np.uint64(1)) for c in ss.spawn(k)]
