import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
