import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fedga.config import ScenarioConfig
from fedga.scenario import generate_scenario

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow], max_examples=200
)
settings.load_profile("repo")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running experiment")


@pytest.fixture(scope="session")
def scenario5():
    return generate_scenario(ScenarioConfig(worker_count=5, seed=42))


@pytest.fixture(scope="session")
def scenario10():
    return generate_scenario(ScenarioConfig(worker_count=10, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
