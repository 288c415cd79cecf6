import logging
import os

import pytest

os.environ.setdefault("AUCTIONLAB_APP_ENV", "test")

from auctionlab.core.config import settings  # noqa: E402
from auctionlab.models.dist import Discrete, Mixture, Uniform  # noqa: E402

# Value law of the mean-based exploitation example.
EXAMPLE_ATOMS = [[0.25, 0.5], [0.5, 0.25], [1.0, 0.25]]


@pytest.fixture(autouse=True)
def _isolated_logging():
    """Restore the root logger after tests that call setup_logging."""
    root = logging.getLogger()
    handlers, filters, level = root.handlers[:], root.filters[:], root.level
    yield
    root.handlers[:] = handlers
    root.filters[:] = filters
    root.setLevel(level)


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Send every default output location to a temporary directory."""
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "runs"))
    return tmp_path / "runs"


@pytest.fixture
def uniform():
    return Uniform(0.0, 1.0)


@pytest.fixture
def example_discrete():
    return Discrete([a for a, _ in EXAMPLE_ATOMS], [p for _, p in EXAMPLE_ATOMS])


@pytest.fixture
def irregular_mixture():
    """Density 1.5 on [0, 0.5] and 0.5 on (0.5, 1]: the virtual value drops at 0.5."""
    return Mixture((Uniform(0.0, 0.5), Uniform(0.0, 1.0)), (0.5, 0.5))


@pytest.fixture
def make_config():
    """Build a raw experiment configuration document."""

    def _make(scenario, **overrides):
        data = {"schema_version": settings.SCHEMA_VERSION, "scenario": scenario}
        data.update(overrides)
        return data

    return _make
