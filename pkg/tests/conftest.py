import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from convcrc import from_octal  # noqa: E402


@pytest.fixture(scope="session")
def code_75():
    return from_octal("7,5", 2)


@pytest.fixture(scope="session")
def code_2335():
    return from_octal("23,35", 4)


@pytest.fixture(scope="session")
def code_133171():
    return from_octal("133,171", 6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in range(1, 11):
        if n in results:
            ok, detail = results[n]
            tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            tr.write_line(f"criterion {n:2d}: NOT RUN")
