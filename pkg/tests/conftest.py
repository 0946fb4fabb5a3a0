import pytest

CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one ``[PASS]/[FAIL] criterion N: ...`` line; shown in the terminal summary."""

    def record(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}"
        print(line)
        CRITERIA.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
