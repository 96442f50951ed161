import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numba compiles kernels lazily on first call, which would trip per-example deadlines
settings.register_profile(
    "mpjacobi", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("mpjacobi")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
