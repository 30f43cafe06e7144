import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_inversion_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="Euler inversion error proxy")
        yield


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def acceptance_report():
    def record(number: int, passed: bool, text: str):
        ACCEPTANCE_LINES[number] = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {text}"
        print(ACCEPTANCE_LINES[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
