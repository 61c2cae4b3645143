"""Tests for the routing model."""

import math

import numpy as np
import pytest

from hazdispatch.core.exceptions import ConfigurationError, ValidationError
from hazdispatch.core.vrpp import (
    FleetConfig,
    RoutingMode,
    VrppSolution,
    build_instance,
    canonical_route,
    objective_value,
    validate_solution,
)


class TestBuildInstance:
    """Test build_instance."""

    def test_zero_values_excluded(self, make_geometry):
        """Test sites with value 0 are not part of the instance."""
        geometry = make_geometry([(0.1, 0.0), (0.2, 0.0), (0.3, 0.0)])
        instance = build_instance(
            [5.0, 0.0, 2.0],
            geometry,
            FleetConfig.homogeneous(1),
            RoutingMode.SENSING,
        )
        assert instance.site_ids == [0, 2]
        assert instance.num_sites == 2
        assert instance.positions.shape == (3, 2)
        assert instance.distances[0, 2] == pytest.approx(0.3)

    def test_sensing_fleet(self, make_geometry):
        """Test sensing instances keep budgets and drop capacities."""
        instance = build_instance(
            [1.0],
            make_geometry([(0.1, 0.0)]),
            FleetConfig.homogeneous(2, max_distance=1.5, capacity=100.0),
            RoutingMode.SENSING,
        )
        assert instance.max_distances == (1.5, 1.5)
        assert all(math.isinf(q) for q in instance.capacities)
        assert instance.visit_limit(0) == 1

    def test_cleaning_fleet(self, make_geometry):
        """Test cleaning instances keep capacities and drop budgets."""
        instance = build_instance(
            [1.0],
            make_geometry([(0.1, 0.0)]),
            FleetConfig.homogeneous(2, max_distance=1.5, capacity=100.0),
            RoutingMode.CLEANING,
            demands=[10.0],
        )
        assert instance.capacities == (100.0, 100.0)
        assert all(math.isinf(d) for d in instance.max_distances)
        assert instance.visit_limit(0) == 2

    def test_visit_limits_capped_by_fleet(self, make_geometry):
        """Test a visit limit above the fleet size is capped."""
        instance = build_instance(
            [1.0, 1.0],
            make_geometry([(0.1, 0.0), (0.2, 0.0)]),
            FleetConfig.homogeneous(2, capacity=100.0),
            RoutingMode.CLEANING,
            demands=[10.0, 10.0],
            visit_limits=[1, 5],
        )
        assert instance.visit_limit(0) == 1
        assert instance.visit_limit(1) == 2

    def test_empty_fleet(self, make_geometry):
        """Test an empty fleet is a configuration error."""
        with pytest.raises(ConfigurationError):
            build_instance(
                [1.0],
                make_geometry([(0.1, 0.0)]),
                FleetConfig.homogeneous(0),
                RoutingMode.SENSING,
            )

    @pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
    def test_bad_values(self, bad, make_geometry):
        """Test negative or non-finite values are input errors."""
        with pytest.raises(ValidationError):
            build_instance(
                [bad],
                make_geometry([(0.1, 0.0)]),
                FleetConfig.homogeneous(1),
                RoutingMode.SENSING,
            )

    def test_unknown_site(self, two_site_instance):
        """Test looking up a site outside the instance fails."""
        with pytest.raises(ValidationError):
            two_site_instance.local(99)


class TestObjective:
    """Test objective_value."""

    def test_empty(self, two_site_instance):
        """Test an empty solution is worth 0."""
        assert objective_value(two_site_instance, VrppSolution.empty(1)) == 0

    def test_single_route(self, two_site_instance):
        """Test value minus travel cost of one short route."""
        solution = VrppSolution(routes=[[0]])
        assert objective_value(two_site_instance, solution) == pytest.approx(
            9.8
        )

    def test_per_visit_value(self, make_geometry):
        """Test cleaning visits by two vehicles each collect the value."""
        instance = build_instance(
            [7.0],
            make_geometry([(0.0, 0.0)]),
            FleetConfig.homogeneous(2, capacity=100.0),
            RoutingMode.CLEANING,
            demands=[5.0],
        )
        solution = VrppSolution(routes=[[0], [0]])
        assert objective_value(instance, solution) == pytest.approx(14.0)

    def test_unknown_site(self, two_site_instance):
        """Test a route through an unknown site is an input error."""
        with pytest.raises(ValidationError):
            objective_value(two_site_instance, VrppSolution(routes=[[7]]))


class TestValidateSolution:
    """Test validate_solution."""

    def test_empty_feasible(self, two_site_instance):
        """Test the empty solution violates nothing."""
        assert validate_solution(
            two_site_instance, VrppSolution.empty(1)
        ) == []

    def test_distance_budget(self, make_geometry):
        """Test a 1.8 km route against a 1.5 km budget."""
        instance = build_instance(
            [5.0],
            make_geometry([(0.0, 0.9)]),
            FleetConfig.homogeneous(1, max_distance=1.5),
            RoutingMode.SENSING,
        )
        violations = validate_solution(instance, VrppSolution(routes=[[0]]))
        assert len(violations) == 1
        assert "exceeds budget" in violations[0]

    def test_sensing_uniqueness(self, make_geometry):
        """Test a site in two sensing routes is reported."""
        geometry = make_geometry([(0.1, 0.0)] * 4)
        instance = build_instance(
            [1.0] * 4,
            geometry,
            FleetConfig.homogeneous(2),
            RoutingMode.SENSING,
        )
        violations = validate_solution(
            instance, VrppSolution(routes=[[3], [0, 3]])
        )
        assert violations == ["site 3: visited by more than one vehicle"]

    def test_capacity(self, make_geometry):
        """Test a load above capacity is reported."""
        instance = build_instance(
            [1.0, 1.0],
            make_geometry([(0.1, 0.0), (0.2, 0.0)]),
            FleetConfig.homogeneous(1, capacity=30.0),
            RoutingMode.CLEANING,
            demands=[20.0, 20.0],
        )
        violations = validate_solution(
            instance, VrppSolution(routes=[[0, 1]])
        )
        assert len(violations) == 1
        assert "exceeds capacity" in violations[0]

    def test_cleaning_visit_limit(self, make_geometry):
        """Test more visits than the site limit are reported."""
        instance = build_instance(
            [1.0],
            make_geometry([(0.1, 0.0)]),
            FleetConfig.homogeneous(2, capacity=100.0),
            RoutingMode.CLEANING,
            demands=[10.0],
            visit_limits=[1],
        )
        violations = validate_solution(
            instance, VrppSolution(routes=[[0], [0]])
        )
        assert violations == ["site 0: visited 2 times, limit 1"]

    def test_repeat_within_route(self, two_site_instance):
        """Test a site twice in one route is reported."""
        violations = validate_solution(
            two_site_instance, VrppSolution(routes=[[0, 0]])
        )
        assert any("visited twice" in v for v in violations)

    def test_too_many_routes(self, two_site_instance):
        """Test more routes than vehicles is reported."""
        violations = validate_solution(
            two_site_instance, VrppSolution(routes=[[], []])
        )
        assert violations == ["2 routes for 1 vehicles"]


class TestCanonicalRoute:
    """Test canonical_route."""

    def test_smaller_direction(self):
        """Test the lexicographically smaller direction is kept."""
        assert canonical_route([3, 1, 2]) == [2, 1, 3]
        assert canonical_route([1, 3, 2]) == [1, 3, 2]
        assert canonical_route([]) == []

    def test_route_length_direction_free(self, make_geometry):
        """Test both directions have the same length."""
        instance = build_instance(
            [1.0, 1.0, 1.0],
            make_geometry([(0.1, 0.0), (0.3, 0.2), (-0.2, 0.4)]),
            FleetConfig.homogeneous(1),
            RoutingMode.SENSING,
        )
        assert instance.route_length([0, 1, 2]) == pytest.approx(
            instance.route_length([2, 1, 0])
        )
        assert np.allclose(instance.distances, instance.distances.T)
