import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cliquelab import make_step_graphon

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

E3, E14 = math.exp(-3.0), math.exp(-0.25)

_verdicts = {}


@pytest.fixture
def w62():
    """Two equal blocks, p11 = e^-3 and p12 = p22 = e^-1/4."""
    return make_step_graphon([0.5, 0.5], [[E3, E14], [E14, E14]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        detail = dict(item.user_properties).get("detail", "")
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _verdicts[mark.args[0]] = (status, mark.args[1], detail)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_verdicts):
        status, title, detail = _verdicts[num]
        line = f"{status}  {num:2d}. {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
