"""
Shared pytest fixtures and the `slow` marker

Long reproduction runs are marked `slow` and only run with FUNCNET_RUN_SLOW=1.
"""

import numpy as np
import pytest

from funcnet.core.config import get_settings
from funcnet.core.grid import make_uniform_grid
from funcnet.core.simulate import MaternParams, sample_gp_values


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running benchmark comparisons")


def pytest_collection_modifyitems(config, items):
    if get_settings().run_slow:
        return
    skip_slow = pytest.mark.skip(reason="set FUNCNET_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return make_uniform_grid(21)


@pytest.fixture
def hidden_grid():
    return make_uniform_grid(11)


@pytest.fixture
def small_curves(small_grid):
    """Eight smooth GP curves on the 21-point grid, shape (8, 1, 21)"""
    return sample_gp_values(8, small_grid, MaternParams(), seed=3)[:, None, :]
