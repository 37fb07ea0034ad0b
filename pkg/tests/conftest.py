import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gdge import bundled_data_path, read_dataset

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def football():
    """The bundled 26-pair football-score dataset."""
    return read_dataset(bundled_data_path(), mode="biv")


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)
