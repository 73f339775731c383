import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_acceptance = {}
_acceptance_marker = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _acceptance_marker[item.nodeid] = tuple(m.args)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = _acceptance_marker.get(report.nodeid)
    if marker is None:
        return
    num, title = marker
    ok = _acceptance.get(num, (title, True))[1] and report.passed
    _acceptance[num] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        title, ok = _acceptance[num]
        terminalreporter.write_line(f"AC{num} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def lat2():
    from nefcone.lattice import product_lattice

    return product_lattice(2)
