import numpy as np
import pytest
from hypothesis import settings

from semcom import ScenarioConfig, generate_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FULL = ScenarioConfig()
ORACLE = ScenarioConfig(
    n_beliefs=6, n_events=12, n_tasks=3, gt_size_min=2, gt_size_max=2, length_max=4
)


@pytest.fixture(scope="session")
def full_scenario():
    return generate_scenario(FULL, 7)


@pytest.fixture(scope="session")
def oracle_scenario():
    return generate_scenario(ORACLE, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_REPORT: list[str] = []


@pytest.fixture(scope="session")
def report():
    """Collects one PASS/FAIL line per acceptance criterion."""

    def add(name: str, ok: bool, detail: str) -> None:
        line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
        _REPORT.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
