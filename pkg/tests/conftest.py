import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def make_rng():
    """Independent generators for trials that must not share a stream"""

    def factory(seed: int) -> np.random.Generator:
        return np.random.default_rng(seed)

    return factory
