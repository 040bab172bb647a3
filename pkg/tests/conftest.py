import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uwcolor.chart import reference_chart
from uwcolor.formation import SceneContext
from uwcolor.spectral import load_camera_response, load_water_type

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def water_ia():
    return load_water_type("IA")


@pytest.fixture(scope="session")
def camera():
    return load_camera_response()


@pytest.fixture(scope="session")
def chart_ref():
    return reference_chart()


@pytest.fixture
def ctx(water_ia, camera):
    return SceneContext(water_ia, camera, depth_m=5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report():
    def record(criterion: str, passed: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
