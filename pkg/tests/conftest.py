import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from oracles import ToyOracle  # noqa: E402

from wildfire_psps.fixtures import toy3_case, toy3_scenarios  # noqa: E402

settings.register_profile("repo", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def toy():
    return toy3_case()


@pytest.fixture(scope="session")
def toy_scenarios():
    return toy3_scenarios()


@pytest.fixture(scope="session")
def toy_oracle(toy):
    return ToyOracle(toy)


@pytest.fixture(scope="session")
def toy_optimum(toy_oracle, toy_scenarios):
    return toy_oracle.best_plan(toy_scenarios)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
