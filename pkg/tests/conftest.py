"""Shared fixtures: the three reference parameter sets and cached models."""

import numpy as np
import pytest

from mwqed import DriveParams, KGrid, build_model, derive_params, find_poles

# the three reference drive configurations used throughout the tests:
# superradiant (Delta = 4), subradiant (Delta = 1), continuum edge (Delta = 0)
DRIVES = {
    4.0: dict(omega_rabi=1.00, delta=4.0),
    1.0: dict(omega_rabi=0.42, delta=1.0),
    0.0: dict(omega_rabi=0.60, delta=0.0),
}


@pytest.fixture(scope="session")
def params():
    """The superfluid-regime lattice: s_z = 8, s_perp = 10."""
    return derive_params(8.0, 10.0)


@pytest.fixture(scope="session")
def drive4():
    return DriveParams(**DRIVES[4.0])


@pytest.fixture(scope="session")
def drive1():
    return DriveParams(**DRIVES[1.0])


@pytest.fixture(scope="session")
def drive0():
    return DriveParams(**DRIVES[0.0])


@pytest.fixture(scope="session")
def poles_by_delta(params, drive4, drive1, drive0):
    """Pole tables for the three reference sets, found once per session."""
    return {d.delta: find_poles(params, d) for d in (drive4, drive1, drive0)}


@pytest.fixture(scope="session")
def small_model(params, drive4):
    """A compact diagonalized model (161 modes) for fast unit checks."""
    return build_model(params, drive4, m_sites=3, grid=KGrid(40.0, 4.0))


def pole_named(poles, name):
    matches = [m for m in poles if m.mode_class == name]
    assert matches, f"no {name} pole found"
    return max(matches, key=lambda m: m.weight)


def bound_states(poles):
    return sorted((m for m in poles if m.mode_class == "BS"),
                  key=lambda m: m.omega_p.real)
