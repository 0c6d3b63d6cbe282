import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line acceptance verdict; printed in the terminal summary."""

    def record(label: str, ok, detail: str):
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        _VERDICTS.append(f"{status}  {label}: {detail}")
        print(_VERDICTS[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
