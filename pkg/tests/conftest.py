import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from caplap.geometry import Interval, RadialAnnulus, RadialBall, build_grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_interval():
    return build_grid(Interval(0.0, 1.0), 64)


@pytest.fixture
def disk():
    return build_grid(RadialBall(2, 1.0), 128)


@pytest.fixture
def annulus():
    return build_grid(RadialAnnulus(2, 1.0, 2.0), 128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion at the end of the run
_criteria = {}


@pytest.fixture
def criterion(record_property):
    def mark(label):
        record_property("criterion", label)
    return mark


def pytest_runtest_logreport(report):
    for key, label in report.user_properties:
        if key != "criterion":
            continue
        prev = _criteria.get(label, "passed")
        if report.failed or prev == "failed":
            _criteria[label] = "failed"
        elif report.when == "call":
            _criteria[label] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0])):
        verdict = "PASS" if _criteria[label] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {label}")
