import pytest

from helpers import tiny1, two_cell
from src.instgen import GenParams, generate_instance


@pytest.fixture
def tiny_instance():
    return tiny1()


@pytest.fixture
def two_cell_instance():
    return two_cell()


@pytest.fixture(scope='session')
def small_generated():
    """A 12x3 generated instance; shared because generation is deterministic."""
    return generate_instance(GenParams(receivers=12, transmitters=3, seed=5))
