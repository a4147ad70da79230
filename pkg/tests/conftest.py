import pytest

from slowmotion.core import Grid, burgers_flux


@pytest.fixture(scope="session")
def flux():
    return burgers_flux()


@pytest.fixture(scope="session")
def grid():
    return Grid(1.0, 400)
