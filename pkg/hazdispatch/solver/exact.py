"""Exhaustive solver for small routing instances.

Shortest depot tours are computed once per site subset (Held-Karp), then
subsets are assigned to vehicles by a memoized search over the remaining
visit allowance of every site. Used as the reference the heuristic is
tested against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.exceptions import InstanceSizeError
from ..core.vrpp import (
    FEASIBILITY_TOL,
    VrppInstance,
    VrppSolution,
    canonical_route,
    objective_value,
)

logger = logging.getLogger(__name__)

DEFAULT_SITE_LIMIT = 8

# Objectives closer than this are treated as tied
TIE_TOL = 1e-9


@dataclass(frozen=True)
class _Candidate:
    mask: int
    profit: float
    visits: int
    route: Tuple[int, ...]


@dataclass(frozen=True)
class _Partial:
    objective: float
    visits: int
    routes: Tuple[Tuple[int, ...], ...]

    def beats(self, other: _Partial) -> bool:
        """Higher objective, then fewer visits, then smaller routes."""
        if self.objective > other.objective + TIE_TOL:
            return True
        if self.objective < other.objective - TIE_TOL:
            return False
        return (self.visits, self.routes) < (other.visits, other.routes)


_EMPTY = _Partial(objective=0.0, visits=0, routes=())


def _shortest_tours(
    distances: np.ndarray, n: int
) -> Tuple[np.ndarray, List[List[int]]]:
    """Shortest depot-anchored tour length and order for every subset."""
    size = 1 << n
    dp = np.full((size, n), math.inf)
    parent = np.full((size, n), -1, dtype=int)

    for j in range(n):
        dp[1 << j, j] = distances[0, j + 1]

    for mask in range(1, size):
        for j in range(n):
            bit = 1 << j
            if not mask & bit or mask == bit:
                continue
            prev = mask ^ bit
            best, arg = math.inf, -1
            for i in range(n):
                if prev & (1 << i):
                    cand = dp[prev, i] + distances[i + 1, j + 1]
                    if cand < best:
                        best, arg = cand, i
            dp[mask, j] = best
            parent[mask, j] = arg

    lengths = np.zeros(size)
    orders: List[List[int]] = [[] for _ in range(size)]
    for mask in range(1, size):
        best, last = math.inf, -1
        for j in range(n):
            if mask & (1 << j):
                cand = dp[mask, j] + distances[j + 1, 0]
                if cand < best:
                    best, last = cand, j
        lengths[mask] = best

        order = []
        cur, j = mask, last
        while j != -1:
            order.append(j)
            cur, j = cur ^ (1 << j), int(parent[cur, j])
        orders[mask] = order[::-1]

    return lengths, orders


def _vehicle_candidates(
    instance: VrppInstance,
    m: int,
    lengths: np.ndarray,
    orders: List[List[int]],
) -> List[_Candidate]:
    """Feasible profitable subsets for vehicle m, best first."""
    n = instance.num_sites
    out = []
    for mask in range(1, 1 << n):
        members = orders[mask]
        length = float(lengths[mask])
        if length > instance.max_distances[m] + FEASIBILITY_TOL:
            continue
        load = float(sum(instance.demands[k] for k in members))
        if load > instance.capacities[m] + FEASIBILITY_TOL:
            continue
        profit = (
            float(sum(instance.values[k] for k in members))
            - instance.travel_cost * length
        )
        if profit <= TIE_TOL:
            continue
        route = canonical_route([instance.site_ids[k] for k in members])
        out.append(
            _Candidate(
                mask=mask,
                profit=profit,
                visits=len(members),
                route=tuple(route),
            )
        )
    out.sort(key=lambda c: (-c.profit, c.visits, c.route))
    out.append(_Candidate(mask=0, profit=0.0, visits=0, route=()))
    return out


def solve_exact(
    instance: VrppInstance, site_limit: int = DEFAULT_SITE_LIMIT
) -> VrppSolution:
    """Provably optimal solution of a small instance.

    Ties are broken by fewer visits, then by the lexicographically
    smallest route vector.

    Raises:
        InstanceSizeError: when the instance has more than site_limit sites
    """
    n = instance.num_sites
    num_vehicles = instance.num_vehicles
    if n > site_limit:
        raise InstanceSizeError(n, site_limit)
    if n == 0:
        return VrppSolution.empty(num_vehicles)

    lengths, orders = _shortest_tours(instance.distances, n)
    candidates = [
        _vehicle_candidates(instance, m, lengths, orders)
        for m in range(num_vehicles)
    ]

    # best single-route profit still available to vehicles m.. (ignores
    # conflicts between them)
    bound = [0.0] * (num_vehicles + 1)
    for m in range(num_vehicles - 1, -1, -1):
        bound[m] = bound[m + 1] + candidates[m][0].profit

    memo: Dict[Tuple[int, Tuple[int, ...]], _Partial] = {}

    def best_from(m: int, remaining: Tuple[int, ...]) -> _Partial:
        if m == num_vehicles:
            return _EMPTY
        key = (m, remaining)
        if key in memo:
            return memo[key]

        avail = 0
        for k, r in enumerate(remaining):
            if r > 0:
                avail |= 1 << k

        best: Optional[_Partial] = None
        for cand in candidates[m]:
            if (
                best is not None
                and cand.profit + bound[m + 1] < best.objective - TIE_TOL
            ):
                break
            if cand.mask & ~avail:
                continue
            after = tuple(
                r - 1 if cand.mask >> k & 1 else r
                for k, r in enumerate(remaining)
            )
            rest = best_from(m + 1, after)
            total = _Partial(
                objective=cand.profit + rest.objective,
                visits=cand.visits + rest.visits,
                routes=(cand.route,) + rest.routes,
            )
            if best is None or total.beats(best):
                best = total

        assert best is not None  # the empty candidate always fits
        memo[key] = best
        return best

    allowance = tuple(instance.visit_limit(k) for k in range(n))
    result = best_from(0, allowance)

    solution = VrppSolution(routes=[list(r) for r in result.routes])
    solution.objective = objective_value(instance, solution)
    logger.debug(
        f"Exact {instance.mode.value} solve: {n} sites, "
        f"{solution.num_visits} visits, objective {solution.objective:.4f}"
    )
    return solution
