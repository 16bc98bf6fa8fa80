import numpy as np
import pytest

from saff import synth
from saff.pipeline import RunConfig


@pytest.fixture(scope="session")
def demo_scene():
    """One mid-difficulty scene reused by the pipeline and CLI tests."""
    return synth.generate(seed=3, size=(48, 48), d_channels=6)


@pytest.fixture(scope="session")
def small_config():
    return RunConfig(k_target=64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
