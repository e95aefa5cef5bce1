import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_grid(rng, dims, fill=0.5):
    from topovox.grid import BinaryGrid

    return BinaryGrid(rng.random(tuple(dims)) < fill)
