"""Vehicle routing problem with profits.

One model serves both phases. Sensing instances enforce a per-vehicle
route budget and at most one visit per site across the fleet; cleaning
instances enforce a per-vehicle capacity and let several vehicles visit
the same site (each at most once). Routes are ordered lists of site ids
that implicitly leave from and return to the depot, so every route is a
single depot-anchored cycle by construction.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .env import SiteGeometry, pairwise_distances
from .exceptions import ConfigurationError, ValidationError

FEASIBILITY_TOL = 1e-9


class RoutingMode(str, Enum):
    SENSING = "sensing"
    CLEANING = "cleaning"


@dataclass(frozen=True)
class FleetConfig:
    """Per-vehicle route budgets and capacities."""

    max_distances: Tuple[float, ...]
    capacities: Tuple[float, ...]

    @classmethod
    def homogeneous(
        cls,
        count: int,
        max_distance: float = math.inf,
        capacity: float = math.inf,
    ) -> FleetConfig:
        return cls(
            max_distances=(float(max_distance),) * count,
            capacities=(float(capacity),) * count,
        )

    @property
    def size(self) -> int:
        return len(self.max_distances)


@dataclass
class VrppInstance:
    """A prize-collecting routing problem over a subset of sites.

    Node 0 of ``positions``/``distances`` is the depot; node k+1 is the
    site ``site_ids[k]``.
    """

    mode: RoutingMode
    site_ids: List[int]
    positions: np.ndarray
    distances: np.ndarray
    values: np.ndarray
    demands: np.ndarray
    max_distances: Tuple[float, ...]
    capacities: Tuple[float, ...]
    travel_cost: float = 1.0
    visit_limits: Optional[np.ndarray] = None
    _index: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {sid: k for k, sid in enumerate(self.site_ids)}

    @property
    def num_sites(self) -> int:
        return len(self.site_ids)

    @property
    def num_vehicles(self) -> int:
        return len(self.max_distances)

    def local(self, site_id: int) -> int:
        """Position of a site id within the instance arrays."""
        try:
            return self._index[site_id]
        except KeyError:
            raise ValidationError(
                f"Site {site_id} is not part of the instance"
            ) from None

    def visit_limit(self, k: int) -> int:
        """Maximum number of vehicles that may visit local site k."""
        if self.mode is RoutingMode.SENSING:
            return 1
        if self.visit_limits is None:
            return self.num_vehicles
        return int(min(self.visit_limits[k], self.num_vehicles))

    def route_length(self, route: Sequence[int]) -> float:
        """Depot-to-depot length of a route given as site ids."""
        return local_route_length(
            self.distances, [self.local(s) for s in route]
        )


@dataclass
class VrppSolution:
    """Per-vehicle ordered routes and their objective."""

    routes: List[List[int]]
    objective: float = 0.0

    @property
    def visited(self) -> List[int]:
        """Distinct visited site ids, sorted."""
        return sorted({s for r in self.routes for s in r})

    @property
    def num_visits(self) -> int:
        return sum(len(r) for r in self.routes)

    @classmethod
    def empty(cls, num_vehicles: int) -> VrppSolution:
        return cls(routes=[[] for _ in range(num_vehicles)], objective=0.0)


def canonical_route(route: Sequence[int]) -> List[int]:
    """Pick the lexicographically smaller of a route and its reversal.

    Distances are symmetric, so both directions cost the same.
    """
    forward = list(route)
    backward = forward[::-1]
    return min(forward, backward)


def local_route_length(distances: np.ndarray, route: Sequence[int]) -> float:
    """Length of a route of local site indices (k maps to node k+1)."""
    if not route:
        return 0.0
    nodes = [0] + [k + 1 for k in route] + [0]
    return float(
        sum(distances[a, b] for a, b in zip(nodes[:-1], nodes[1:]))
    )


def build_instance(
    values: Sequence[float],
    geometry: Sequence[SiteGeometry],
    fleet: FleetConfig,
    mode: RoutingMode,
    travel_cost: float = 1.0,
    demands: Optional[Sequence[float]] = None,
    visit_limits: Optional[Sequence[int]] = None,
) -> VrppInstance:
    """Routing instance over the sites with a positive value.

    ``values``, ``demands`` and ``visit_limits`` are aligned with
    ``geometry``. Sensing instances drop demands and capacities; cleaning
    instances drop route budgets.
    """
    if fleet.size == 0:
        raise ConfigurationError("Fleet must contain at least one vehicle")
    if len(fleet.capacities) != fleet.size:
        raise ConfigurationError(
            "Fleet budgets and capacities differ in length"
        )

    values_arr = np.asarray(values, dtype=float)
    if values_arr.shape[0] != len(geometry):
        raise ValidationError(
            f"Got {values_arr.shape[0]} values for {len(geometry)} sites"
        )
    if not np.all(np.isfinite(values_arr)) or np.any(values_arr < 0):
        raise ValidationError("Visit values must be finite and non-negative")

    keep = [i for i in range(len(geometry)) if values_arr[i] > 0]
    site_ids = [geometry[i].id for i in keep]
    positions = np.array(
        [(0.0, 0.0)] + [geometry[i].position for i in keep], dtype=float
    ).reshape(-1, 2)

    if mode is RoutingMode.SENSING:
        site_demands = np.zeros(len(keep))
        max_distances = tuple(float(d) for d in fleet.max_distances)
        capacities = (math.inf,) * fleet.size
        limits = None
    else:
        if demands is None:
            site_demands = np.zeros(len(keep))
        else:
            all_demands = np.asarray(demands, dtype=float)
            if np.any(all_demands < 0) or not np.all(
                np.isfinite(all_demands)
            ):
                raise ValidationError(
                    "Demands must be finite and non-negative"
                )
            site_demands = all_demands[keep]
        max_distances = (math.inf,) * fleet.size
        capacities = tuple(float(q) for q in fleet.capacities)
        limits = (
            None
            if visit_limits is None
            else np.asarray(visit_limits, dtype=int)[keep]
        )

    return VrppInstance(
        mode=mode,
        site_ids=site_ids,
        positions=positions,
        distances=pairwise_distances(positions),
        values=values_arr[keep],
        demands=site_demands,
        max_distances=max_distances,
        capacities=capacities,
        travel_cost=travel_cost,
        visit_limits=limits,
    )


def objective_value(instance: VrppInstance, solution: VrppSolution) -> float:
    """Collected value (per visit) minus travel cost of all routes."""
    total = 0.0
    for route in solution.routes:
        local = [instance.local(s) for s in route]
        total += float(sum(instance.values[k] for k in local))
        total -= instance.travel_cost * local_route_length(
            instance.distances, local
        )
    return total


def validate_solution(
    instance: VrppInstance, solution: VrppSolution
) -> List[str]:
    """Every violated constraint, as human-readable strings."""
    violations: List[str] = []

    if len(solution.routes) > instance.num_vehicles:
        violations.append(
            f"{len(solution.routes)} routes for "
            f"{instance.num_vehicles} vehicles"
        )

    visits: Counter[int] = Counter()
    for m, route in enumerate(solution.routes):
        unknown = [s for s in route if s not in instance._index]
        if unknown:
            violations.append(f"vehicle {m}: unknown sites {unknown}")
            continue

        dup = sorted(s for s, c in Counter(route).items() if c > 1)
        if dup:
            violations.append(f"vehicle {m}: sites visited twice {dup}")
        visits.update(set(route))

        if m >= instance.num_vehicles:
            continue
        length = instance.route_length(route)
        budget = instance.max_distances[m]
        if length > budget + FEASIBILITY_TOL:
            violations.append(
                f"vehicle {m}: route length {length:.6f} km exceeds "
                f"budget {budget:.6f} km"
            )
        load = float(sum(instance.demands[instance.local(s)] for s in route))
        capacity = instance.capacities[m]
        if load > capacity + FEASIBILITY_TOL:
            violations.append(
                f"vehicle {m}: load {load:.6f} exceeds capacity "
                f"{capacity:.6f}"
            )

    for site, count in sorted(visits.items()):
        limit = instance.visit_limit(instance.local(site))
        if count > limit:
            label = (
                "visited by more than one vehicle"
                if instance.mode is RoutingMode.SENSING
                else f"visited {count} times, limit {limit}"
            )
            violations.append(f"site {site}: {label}")

    return violations
