from __future__ import annotations

import mpmath
import pytest

from helpers import bounds, table65


@pytest.fixture(scope="session")
def tables():
    return table65


@pytest.fixture(scope="session")
def y_bounds():
    return bounds


@pytest.fixture(autouse=True)
def _reset_precision():
    dps = mpmath.mp.dps
    yield
    mpmath.mp.dps = dps


_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
