import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_record():
    """Record and print one pass/fail line per acceptance criterion."""

    def record(num, name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"[criterion {num:02d}] {name}: {status}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)
