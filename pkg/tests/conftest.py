from __future__ import annotations

import os

import numpy as np
import pytest

from cmcflux import catalog

SEED = int(os.environ.get("CMC_SEED", "20260417"))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def catenoid_entry():
    return catalog.catenoid()


@pytest.fixture(scope="session")
def cylinder_entry():
    return catalog.cylinder()


@pytest.fixture(scope="session")
def sphere_entry():
    return catalog.sphere()


@pytest.fixture(scope="session")
def unduloid_entry():
    return catalog.delaunay(catalog.DelaunayParams(0.5, 0.3))


@pytest.fixture(scope="session")
def nodoid_entry():
    return catalog.delaunay(catalog.DelaunayParams(0.5, -0.3))


@pytest.fixture(scope="session")
def family_n1():
    return catalog.punctured_plane_family([0.0], 1)


@pytest.fixture(scope="session")
def family_n2():
    return catalog.punctured_plane_family([1.0, -1.0], 1)


@pytest.fixture(scope="session")
def annulus_entry():
    return catalog.catenoid_annulus()


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a numbered criterion and fail the test when it does not hold."""

    def record(number: int, ok: bool, detail: str):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
