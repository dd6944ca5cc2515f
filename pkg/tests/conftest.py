import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sftkit.signal import TestSignal, make_test_signal

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def noise():
    def make(N, seed=0):
        return make_test_signal(TestSignal.SEEDED_NOISE, N, seed=seed)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
