import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cqms_lab.automorphisms import CAT_MAP
from cqms_lab.groups import FreeAbelian, FreeGroup, Semidirect, minus_identity

settings.register_profile(
    "lab", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def Z1():
    return FreeAbelian(1)


@pytest.fixture(scope="session")
def Z2():
    return FreeAbelian(2)


@pytest.fixture(scope="session")
def F2():
    return FreeGroup(2)


@pytest.fixture(scope="session")
def Z2xZ():
    return Semidirect(minus_identity(2))


@pytest.fixture(scope="session")
def Z3xZ():
    return Semidirect(minus_identity(3))


@pytest.fixture(scope="session")
def Z2xcatZ():
    return Semidirect(CAT_MAP)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the terminal summary prints them in order."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number: int, title: str, passed: bool, detail: str, seconds: float):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{status}] {title}: {detail} ({seconds:.1f} s)"
        lines.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
