import pytest

from stochround.fp_core import BINARY32

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def b32():
    return BINARY32


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
