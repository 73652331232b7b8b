import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "limitset",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("limitset")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, shown at the end of every run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
