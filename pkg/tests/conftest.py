import numpy as np
import pytest

from autoad.series import TimeSeries


def ar1_series(phi: float, n: int, seed: int, sigma: float = 1.0, mean: float = 0.0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    eps = rng.normal(0, sigma, n)
    y = np.zeros(n)
    for t in range(1, n):
        y[t] = phi * y[t - 1] + eps[t]
    return TimeSeries.from_values(y + mean)


def seasonal_ar_series(n: int = 400, seed: int = 11, period: int = 24) -> TimeSeries:
    """AR(1) noise riding a sinusoid: the standard tuning benchmark series."""
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    eps = rng.normal(0, 1, n)
    y = np.zeros(n)
    for i in range(1, n):
        y[i] = 0.6 * y[i - 1] + eps[i]
    return TimeSeries.from_values(10 + 3 * np.sin(2 * np.pi * t / period) + y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
