import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coarse_ends import samples as smp  # noqa: E402
from coarse_ends.grid import TruncationGrid, default_grid  # noqa: E402
from coarse_ends.spaces import GridSpace, LineSpace  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "coarse_ends" / "data"


@pytest.fixture(autouse=True)
def _no_grid_env(monkeypatch):
    monkeypatch.delenv("COARSE_ENDS_GRID", raising=False)


@pytest.fixture(scope="session")
def grid():
    return TruncationGrid()


@pytest.fixture(scope="session")
def small_grid():
    return TruncationGrid((2, 4, 6, 8, 10))


@pytest.fixture(scope="session")
def line():
    return smp.line()


@pytest.fixture(scope="session")
def plane():
    return smp.plane()


@pytest.fixture(scope="session")
def small_plane():
    return GridSpace(2, "L1", 24)


@pytest.fixture(scope="session")
def small_line():
    return LineSpace(40)


@pytest.fixture(scope="session")
def data():
    return DATA
