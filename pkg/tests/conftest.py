import json
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

DATA = Path(__file__).with_name("data")

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def special_oracle():
    with open(DATA / "special_oracle.json") as fh:
        doc = json.load(fh)
    out = {}
    for name in ("erfcx", "e1"):
        a = np.array(doc[name])
        out[name] = (a[:, 0] + 1j * a[:, 1], a[:, 2] + 1j * a[:, 3])
    return out


@pytest.fixture(scope="session")
def cme29():
    from shiftnilt.cme import cme_coefficients

    return cme_coefficients(29)


@pytest.fixture(scope="session")
def euler28():
    from shiftnilt.euler import euler_coefficients

    return euler_coefficients(28)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criterion_outcomes = {}


def pytest_runtest_logreport(report):
    item_marker = getattr(report, "criterion", None)
    if item_marker is None:
        return
    outcomes = _CONFIG[0]._criterion_outcomes
    failed = report.failed
    if report.when == "call" or failed:
        outcomes[item_marker] = outcomes.get(item_marker, True) and not failed


_CONFIG = []


def pytest_sessionstart(session):
    _CONFIG[:] = [session.config]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter, config):
    outcomes = config._criterion_outcomes
    if not outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for number in sorted(outcomes):
        status = "PASS" if outcomes[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}: {CRITERIA[number]}")
