import sys
from pathlib import Path

import pytest

# lets the test modules import the shared reference computations
sys.path.insert(0, str(Path(__file__).parent))

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; printed now and again in the terminal summary."""

    def record(number, title, checks, detail=""):
        ok = all(checks.values())
        failed = ", ".join(k for k, v in checks.items() if not v)
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  [{detail}]"
        if failed:
            line += f"  failed: {failed}"
        print(line)
        _VERDICTS.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS):
        terminalreporter.write_line(line)
