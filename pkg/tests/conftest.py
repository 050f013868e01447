import numpy as np
import pytest

from modlab.grid import Field, make_grid
from modlab.windows import gaussian_window


@pytest.fixture(scope="session")
def grid():
    return make_grid(1, 16 * np.pi, 512)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1, 8 * np.pi, 128)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 8 * np.pi, 64)


@pytest.fixture(scope="session")
def phi0(grid):
    return gaussian_window(grid)


def packet(g, x0=0.5, width=1.0, k0=1.0):
    X = g.mesh()
    d = X - x0
    return Field(g, np.exp(-np.sum(d ** 2, axis=-1) / (2 * width ** 2) + 1j * k0 * np.sum(d, axis=-1)))


@pytest.fixture
def gauss(grid):
    return packet(grid)
