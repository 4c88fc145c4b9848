import math

import numpy as np
import pytest

from artifact.contour import CollocationGrid
from artifact.greenkernel import SpectralParams, build_smooth_grid


@pytest.fixture(scope="session")
def params():
    return SpectralParams(0.5, 0.25)


@pytest.fixture(scope="session")
def kgrid(params):
    # r_max = (1 + b) / 2 is the largest radius the grid may cover
    return build_smooth_grid(params, 0.625)


@pytest.fixture(scope="session")
def cgrid():
    return CollocationGrid()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def polar(z):
    return abs(z), math.atan2(z.imag, z.real)
