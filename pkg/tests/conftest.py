import numpy as np
import pytest

from anisocap import _backend
from anisocap.geometry import stock_body
from anisocap.grid import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["square", "diamond", "hexagon", "disk256"])
def planar_body(request):
    return stock_body(request.param)


@pytest.fixture
def small_grid():
    return Grid.covering(2, 32, 2.0)


@pytest.fixture(params=sorted(_backend.implementations()))
def backend_impl(request):
    return _backend.implementations()[request.param]


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one line per acceptance criterion for the terminal summary."""
    log = getattr(request.config, "_acceptance_lines", None)
    if log is None:
        log = request.config._acceptance_lines = []
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
