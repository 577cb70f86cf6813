import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparse_smooth.operators import Measurement, SamplingPattern, forward
from sparse_smooth.simulate import gen_pattern

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def dft_matrix(n):
    """Explicit 1-D unnormalized DFT matrix, built without any FFT routine."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def dense_dft2(x):
    f = dft_matrix(x.shape[0])
    return f @ x @ f.T


def random_hermitian(pattern, rng):
    """Hermitian-consistent measurement that is not in the range of a smooth image."""
    return forward(pattern, rng.standard_normal((pattern.n, pattern.n)))


def full_pattern(n):
    k, l = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return SamplingPattern(n, np.stack([k.ravel(), l.ravel()], axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def pattern8():
    return gen_pattern(8, 0.5, seed=3)


@pytest.fixture
def pattern16():
    return gen_pattern(16, 0.3, seed=1)


def zero_measurement(pattern):
    return Measurement(pattern, np.zeros(pattern.L, dtype=complex))


def synthetic_instance(n, seed, alpha1=0.08, alpha2=0.5, psnr=20.0):
    from sparse_smooth.cli import make_instance, simulate_instance

    truth, pattern, y = simulate_instance(n, seed, psnr=psnr)
    return make_instance(pattern, y, alpha1, alpha2), truth


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Log one acceptance line; shown in the terminal summary whatever the outcome."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def _record(criterion, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
