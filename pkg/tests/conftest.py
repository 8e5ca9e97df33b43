import numpy as np
import pytest

from sparsetrig.fourier_ops import MeasurementOperator, draw_samples, make_frequency_set


def dense_oracle(fs, X):
    """Independent dense matrix ``exp(i x_j . k)`` from floating-point points."""
    return np.exp(1j * (X.points @ fs.freqs.T.astype(float)))


def make_op(D=8, N=5, model="continuous", seed=0, gamma=None, **kw):
    fs = make_frequency_set(1, gamma or f"range:0:{D - 1}")
    X = draw_samples(fs, model, N, seed)
    return MeasurementOperator(fs, X, **kw)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
