import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from srsg.data import Dataset, normalize_columns  # noqa: E402

from oracles import subspace_data  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_dataset(seed, d=6, n=8):
    rng = np.random.default_rng(seed)
    return normalize_columns(Dataset(points=rng.standard_normal((d, n))))


@pytest.fixture
def small_data():
    return random_dataset(0)


@pytest.fixture(scope="session")
def synthetic():
    X, y = subspace_data(seed=0)
    return Dataset(points=X, labels=y)


@pytest.fixture
def data_dir():
    return DATA_DIR


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
