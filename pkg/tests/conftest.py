"""Collects acceptance verdicts and prints them as one block at the end of the run."""

import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a criterion outcome, then fail the test if it did not hold."""

    def record(name: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        VERDICTS.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
