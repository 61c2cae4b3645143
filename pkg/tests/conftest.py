"""Shared fixtures for hazdispatch tests."""

import math

import numpy as np
import pytest

from hazdispatch.core.config import ScenarioConfig
from hazdispatch.core.env import SiteGeometry
from hazdispatch.core.vrpp import FleetConfig, RoutingMode, build_instance


def geometry_of(points):
    """Site geometry for a list of (x, y) positions, ids 0..n-1."""
    return [
        SiteGeometry(
            id=i,
            position=(float(x), float(y)),
            depot_distance=math.hypot(x, y),
        )
        for i, (x, y) in enumerate(points)
    ]


def random_instance(rng, num_sites, mode):
    """Small random instance with tight budgets or capacities."""
    points = rng.uniform(-0.5, 0.5, size=(num_sites, 2))
    geometry = geometry_of(points)
    if mode is RoutingMode.SENSING:
        values = rng.uniform(0.2, 2.0, size=num_sites)
        fleet = FleetConfig.homogeneous(2, max_distance=1.5)
        return build_instance(values, geometry, fleet, mode)

    demands = rng.uniform(5.0, 25.0, size=num_sites)
    means = demands + rng.uniform(0.0, 30.0, size=num_sites)
    fleet = FleetConfig.homogeneous(2, capacity=50.0)
    return build_instance(
        means * demands / 25.0,
        geometry,
        fleet,
        mode,
        demands=demands,
        visit_limits=rng.integers(1, 3, size=num_sites),
    )


@pytest.fixture
def make_geometry():
    """Factory for site geometry from positions."""
    return geometry_of


@pytest.fixture
def make_random_instance():
    """Factory for seeded random instances."""
    return random_instance


@pytest.fixture
def two_site_instance():
    """Sensing instance: A at (0, 0.1) worth 10, B at (0, 0.4) worth 1."""
    geometry = geometry_of([(0.0, 0.1), (0.0, 0.4)])
    fleet = FleetConfig.homogeneous(1, max_distance=0.5)
    return build_instance([10.0, 1.0], geometry, fleet, RoutingMode.SENSING)


@pytest.fixture
def small_config():
    """Quick scenario: 6 sites, exact-sized routing."""
    return ScenarioConfig.from_dict(
        {
            "num_sites": 6,
            "num_uavs": 2,
            "num_ugvs": 2,
            "max_rounds": 15,
            "seed": 3,
            "solver": {"budget": 5},
        }
    )


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(12345)
