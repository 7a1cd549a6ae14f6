import numpy as np
import pytest

from splitsched.profile import default_profile, tiny_profile


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def tiny():
    return tiny_profile()


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(12345))
