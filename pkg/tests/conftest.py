# tests/conftest.py
import numpy as np
import pytest

from src.data.loader import dataset_from_columns


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow simulation tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running replication studies (use --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def mediation_data():
    """n=200 draws from M = 0.5 X + e2, Y = 0.2 X + 0.5 M + e1."""
    rng = np.random.default_rng(20240611)
    x = rng.normal(size=200)
    m = 0.5 * x + rng.normal(size=200)
    y = 0.2 * x + 0.5 * m + rng.normal(size=200)
    return dataset_from_columns(("X", "M", "Y"), x, m, y)


@pytest.fixture
def triangle_text():
    return "M ~ X\nY ~ X + M\n"


@pytest.fixture
def write_csv(tmp_path):
    """Write a Dataset (or raw text) to a CSV file and return its path."""

    def _write(data, name="data.csv"):
        path = tmp_path / name
        if isinstance(data, str):
            path.write_text(data, encoding="utf-8")
            return path
        lines = [",".join(data.columns)]
        lines += [",".join(repr(float(v)) for v in row) for row in data.values]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
