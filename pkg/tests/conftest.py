import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # for the oracles module

from facinv.generator import load_generator
from facinv.grid import FaciesGrid, GridDims, load_grid

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")
TI_DIMS = GridDims(120, 150, 180, 50.0, 50.0, 1.0)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_weights_path():
    return os.path.join(DATA_DIR, "fixture_gen_32x32x16.facgen")


@pytest.fixture(scope="session")
def fixture_network(fixture_weights_path):
    return load_generator(fixture_weights_path)


@pytest.fixture(scope="session")
def training_image():
    return load_grid(os.path.join(DATA_DIR, "training_image.u8"), "raw_u8", TI_DIMS)


def random_facies(rng, shape=None, p_channel=0.5):
    """Seeded random binary facies grid for property tests."""
    if shape is None:
        shape = tuple(int(rng.integers(2, 9)) for _ in range(3))
    values = (rng.random(shape) < p_channel).astype(np.uint8)
    return FaciesGrid(GridDims(*shape), values)
