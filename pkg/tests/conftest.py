import sys

import pytest
from hypothesis import settings
from mpmath import mp

settings.register_profile("ilc", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("ilc")


@pytest.fixture(autouse=True)
def fifty_digits():
    with mp.workdps(50):
        yield


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
