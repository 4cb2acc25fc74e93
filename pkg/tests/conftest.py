from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conictori import ConicParams

settings.register_profile(
    "conictori", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("conictori")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[0, 1, 2, 3])
def small_params(request):
    return ConicParams(request.param, 10.0, 0.1)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
