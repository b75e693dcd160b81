import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from dbkclique import _accel

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=[True, False], ids=["jit", "numpy"])
def jit_mode(request):
    """Run a test once with the compiled kernels and once with the fallbacks."""
    if request.param and not _accel.HAS_NUMBA:
        pytest.skip("numba not importable")
    previous = _accel.set_jit(request.param)
    yield request.param
    _accel.set_jit(previous)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
