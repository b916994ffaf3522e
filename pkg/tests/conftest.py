import os
import tempfile

import pytest

# share the F table and e_tf between the test process and CLI subprocesses
os.environ.setdefault("RELTFW_CACHE_DIR", os.path.join(tempfile.gettempdir(), "reltfw-test-cache"))

from reltfw.params import PhysicalParams  # noqa: E402
from reltfw.radial import default_grid, minimize  # noqa: E402

ALPHA = 1.0 / 137.0


@pytest.fixture(scope="session")
def hydrogen():
    """Converged Z = 1, N = 1 solve on the default grid."""
    params = PhysicalParams(lam=1.0, alpha_s=ALPHA, Z_list=(1.0,), N=1.0)
    return minimize(params, default_grid(ALPHA))


@pytest.fixture(scope="session")
def small_grid():
    return default_grid(ALPHA, n=500)


# acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title = marker.args
    if rep.when == "call" or rep.failed:
        ok = rep.passed and _ACCEPTANCE.get(number, (title, True))[1]
        _ACCEPTANCE[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
