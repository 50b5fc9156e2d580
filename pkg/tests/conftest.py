"""Shared fixtures: cached solves and the acceptance summary printed at the end of the run."""

from __future__ import annotations

import pytest

from artifact.fuchsian_ode import PunctureConfig
from artifact.uniformizer import SolvedUniformization

# lines appended by tests/test_acceptance.py, one per criterion
ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def config4():
    return PunctureConfig((0.3,))


@pytest.fixture(scope="session")
def solved4(config4):
    return SolvedUniformization.solve(config4)


@pytest.fixture(scope="session")
def solved3():
    return SolvedUniformization.solve(PunctureConfig(()))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
