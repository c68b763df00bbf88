import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def record():
    """Store one PASS/FAIL line per acceptance criterion for the session summary."""

    def _record(label: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE_LINES[label] = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(ACCEPTANCE_LINES[label])
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:].split()[0])):
        terminalreporter.write_line(ACCEPTANCE_LINES[label])
