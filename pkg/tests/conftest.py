import numpy as np
import pytest

from gridpulse import _kernels
from gridpulse.core import UniformSeries

# 2024-03-04 00:00:00 UTC, a Monday
MONDAY = 1709510400


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    if request.param == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setenv(_kernels.ENV_FLAG, "1" if request.param == "numpy" else "")
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240304)


def make_series(values, start=MONDAY, dt=1, valid=None, unit="hertz"):
    return UniformSeries(start, dt, np.asarray(values, dtype=float), valid, unit)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS, key=lambda s: int(s.split("criterion")[1].split()[0])):
        terminalreporter.write_line(line)
