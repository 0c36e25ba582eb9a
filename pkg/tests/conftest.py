import pytest

from ptfopt import OpticsConfig


@pytest.fixture(scope="session")
def cfg():
    return OpticsConfig()


@pytest.fixture(scope="session")
def small_cfg():
    # coarse grid for tests that only need qualitative behaviour
    return OpticsConfig(grid_size=128)
