from pathlib import Path

import numpy as np
import pytest

from multicast_sinr.cli import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def two_session_scenario():
    return load_scenario(SCENARIO_DIR / "two_sessions_four_receivers.json")


@pytest.fixture(scope="session")
def two_session_model(two_session_scenario):
    return two_session_scenario.model


@pytest.fixture(scope="session")
def two_session_cons(two_session_scenario):
    return two_session_scenario.constraints


@pytest.fixture(scope="session")
def three_session_model():
    return load_scenario(SCENARIO_DIR / "three_sessions_six_receivers.json").model


def unicast_unit_model(sigma2=1.0):
    """Two single-receiver sessions, all gains 1."""
    from multicast_sinr import NetworkModel

    return NetworkModel(2, (1, 1), np.ones((2, 2)), sigma2)
