from pathlib import Path

import pytest

from qpomdp.bench import tiny

DATA = Path(__file__).parent / "data"


@pytest.fixture
def straddle():
    return tiny.straddle()


@pytest.fixture
def trap():
    return tiny.trap()


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
