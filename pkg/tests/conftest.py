import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


@pytest.fixture
def fixture_path():
    def get(name):
        return Path(str(resources.files("auditnb").joinpath(f"data/{name}")))

    return get


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary."""

    def record(number, title, passed, detail="", status=None):
        status = status or ("PASS" if passed else "FAIL")
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
