import numpy as np
import pytest

from d2dmalware.devices import DeviceSet, Role
from d2dmalware.streets import StreetSystem, Window

ACCEPTANCE_LINES = []


def line_devices(positions, half_width, knights=()):
    """DeviceSet over explicit positions, patient zero first, on a single horizontal street."""
    positions = np.asarray(positions, dtype=float)
    streets = StreetSystem(
        window=Window(half_width),
        a=np.array([[-half_width, 0.0]]),
        b=np.array([[half_width, 0.0]]),
        gamma_target=1.0,
    )
    roles = np.full(len(positions), Role.ORDINARY, dtype=np.int8)
    roles[0] = Role.PATIENT_ZERO
    roles[list(knights)] = Role.KNIGHT
    return DeviceSet(streets, positions, roles, np.zeros(len(positions), dtype=np.int64), 1.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
