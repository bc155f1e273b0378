"""Collects the acceptance verdicts and prints them after the run."""

import pytest

_verdicts = []


@pytest.fixture
def verdict():
    """``verdict(number, passed, detail)`` records and prints one line, then asserts."""

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        _verdicts.append((number, line))
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_verdicts):
        terminalreporter.write_line(line)
