import numpy as np
import pytest

import rigidnet._kernels as kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compile once so timed acceptance segments measure the math only
    kernels.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
