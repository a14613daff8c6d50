import os

import pytest
from hypothesis import HealthCheck, settings

from cyccov import corpus
from cyccov.graphcore import Multigraph

settings.register_profile(
    "cyccov", max_examples=int(os.environ.get("CYCCOV_HYPOTHESIS_EXAMPLES", "60")), deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cyccov")

# lines printed by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def petersen() -> Multigraph:
    return corpus.petersen()


@pytest.fixture(scope="session")
def k4() -> Multigraph:
    return corpus.complete(4)


@pytest.fixture(scope="session")
def triangle() -> Multigraph:
    return corpus.circuit(3)


@pytest.fixture(scope="session")
def q3() -> Multigraph:
    return corpus.cube()
