import math

import pytest

from imexdimsim.stability import region_S_alpha, region_SE
from imexdimsim.tableau import catalog

ACCEPTANCE_LINES: list[str] = []


REGIONS: dict = {}


def compute_region(name: str, kind: str):
    t = catalog(name)
    if kind == "SE":
        return region_SE(t)
    if kind == "Spi2":
        return region_S_alpha(t, math.pi / 2)
    raise ValueError(kind)


def cached_region(name: str, kind: str):
    """S_E or S_{pi/2} of a catalog method, shared by all test modules."""
    if (name, kind) not in REGIONS:
        REGIONS[name, kind] = compute_region(name, kind)
    return REGIONS[name, kind]


@pytest.fixture(scope="session")
def report():
    def add(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
