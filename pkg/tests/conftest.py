import numpy as np
import pytest

from performance import PerformanceMonitor, clear_cache


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def fresh_state():
    clear_cache()
    PerformanceMonitor.reset()
    yield
    clear_cache()
    PerformanceMonitor.reset()
