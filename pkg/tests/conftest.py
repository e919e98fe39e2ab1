import pytest

from smoothprime.primality import SmoothParams

# reference defaults: delta 0.05, sine kernel eps 1e-5, p 8
DEFAULTS = SmoothParams()

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def default_params():
    return DEFAULTS


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
