import numpy as np
import pytest

from porphase.geometry import build_unit_cell, tile_domain
from porphase.grid import StaggeredGrid


@pytest.fixture(scope="session")
def disk_cell16():
    return build_unit_cell(2, "disk", 0.25, 16)


@pytest.fixture(scope="session")
def domain16x4(disk_cell16):
    return tile_domain(disk_cell16, 4)


@pytest.fixture()
def box32():
    return StaggeredGrid(np.ones((32, 32), dtype=bool), 1.0 / 32,
                         periodic=False)
