import random

import pytest

from ecqvkd.simulation import provision

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def deployment():
    """One CA and two certified devices, shared by read-only tests."""
    return provision(random.Random(2024))


@pytest.fixture
def rng():
    return random.Random(7)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
