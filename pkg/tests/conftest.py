import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"criterion {number}: {status}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
