from pathlib import Path

import pytest

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

#: (number, passed, detail) lines recorded by the acceptance suite
ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    def _record(number, ok, detail):
        ACCEPTANCE_LINES.append((number, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
