import functools

import pytest

from platewave.fem import MaterialParams
from platewave.mesh import PlateGeometry, build_structured_mesh, enumerate_nodes


@pytest.fixture(scope="session")
def geom():
    return PlateGeometry()


@pytest.fixture(scope="session")
def mat():
    return MaterialParams.aluminium()


@functools.lru_cache(maxsize=None)
def mesh_and_nodes(ny: int, k: int, Lx: float = 5e-2, Ly: float = 1e-3):
    mesh = build_structured_mesh(PlateGeometry(Lx, Ly), ny)
    return mesh, enumerate_nodes(mesh, k)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
