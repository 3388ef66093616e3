import numpy as np
import pytest

from causalfm import Dataset, ModelConfig
from causalfm.kernels import use_backend


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    with use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def tiny_data():
    rng = np.random.default_rng(5)
    n, q, p = 40, 3, 2
    x = rng.standard_normal((n, p))
    t = np.zeros(n, dtype=int)
    t[: n // 2] = 1
    y = rng.standard_normal((n, q)) + t[:, None]
    return Dataset.from_arrays(y, t, x)


@pytest.fixture
def short_cfg():
    return ModelConfig(j_max=2, l_max=3, n_iter=30, burn_in=10, rng_seed=3)
