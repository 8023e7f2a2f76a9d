import numpy as np
import pytest

from symcurl import mesh as mesh_mod
from symcurl.polyspace import HEX, REF_HEX_VERTICES, REF_TET_VERTICES, TET

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def ref_tet():
    return mesh_mod.OrientedMesh(TET, REF_TET_VERTICES, [[0, 1, 2, 3]])


@pytest.fixture(scope="session")
def ref_hex():
    return mesh_mod.OrientedMesh(HEX, REF_HEX_VERTICES, [list(range(8))])


@pytest.fixture(scope="session")
def two_tets():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
    return mesh_mod.OrientedMesh(TET, verts, [[0, 1, 2, 3], [1, 2, 3, 4]])


@pytest.fixture(scope="session")
def cube_tet2():
    return mesh_mod.generate("cube-tet:2")


@pytest.fixture(scope="session")
def cube_hex2():
    return mesh_mod.generate("cube-hex:2")
