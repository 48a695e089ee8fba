import functools

import pytest

from llgbmo import selfsim

# filled by test_acceptance; printed in the terminal summary
ACCEPTANCE_LINES: dict = {}


@functools.lru_cache(maxsize=None)
def cached_profile(c: float, alpha: float, tol: float = 1e-12):
    return selfsim.build_profile(c, alpha, tol)


@pytest.fixture
def profile_cache():
    return cached_profile


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
