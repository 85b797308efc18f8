"""Shared desk-scale fixtures; heavy objects are built once per session."""

import math

import pytest

from rimnull.geometry import FarFieldDirection, FeedModel, build_geometry
from rimnull.resnet_sa import MismatchScenario


@pytest.fixture(scope="session")
def desk_geometry():
    return build_geometry(1.4, 0.1, 0.4, 1.5e9)


@pytest.fixture(scope="session")
def theoretical_feed():
    return FeedModel(q_exponent=1.14)


@pytest.fixture(scope="session")
def true_feed():
    return FeedModel(q_exponent=1.5)


@pytest.fixture(scope="session")
def desk_target():
    return FarFieldDirection(math.radians(16.0), 0.0)


@pytest.fixture(scope="session")
def desk_scenario(desk_geometry, theoretical_feed, true_feed, desk_target):
    return MismatchScenario(geometry=desk_geometry,
                            theoretical_feed=theoretical_feed,
                            true_feed=true_feed,
                            target=desk_target)
