import math

import numpy as np
import pytest

from gmc.cone import build_grid, circular_cone, polyhedral_cone

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def quarter():
    return polyhedral_cone([[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def quarter_grid(quarter):
    return build_grid(quarter)


@pytest.fixture(scope="session")
def cap3():
    return circular_cone([0.0, 0.0, 1.0], math.pi / 3)


@pytest.fixture(scope="session")
def cap3_grid(cap3):
    return build_grid(cap3)


@pytest.fixture(scope="session")
def octant():
    return polyhedral_cone(np.eye(3))


@pytest.fixture
def axis2():
    return np.array([1.0, 1.0]) / math.sqrt(2.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _ACCEPTANCE[number] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
