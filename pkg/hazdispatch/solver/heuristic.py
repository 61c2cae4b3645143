"""GRASP heuristic for the routing problem with profits.

Each restart builds a solution by randomized value-per-cost insertion and
improves it with local search until no neighbourhood move gains. The
first restart is purely greedy. The best plan over all restarts is then
kicked: some visits are removed, the plan is rebuilt by randomized
insertion and searched again, and the kick is kept when it gains.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..core.exceptions import ContractError, SolverError
from ..core.vrpp import (
    FEASIBILITY_TOL,
    VrppInstance,
    VrppSolution,
    canonical_route,
    objective_value,
    validate_solution,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 20

# Smallest objective change counted as an improvement
EPS = 1e-9

# Fraction of the score range admitted to the candidate list
RCL_ALPHA = 0.3

# Keeps value-per-cost finite for zero-cost insertions
COST_FLOOR = 1e-6

# Ruin-and-recreate kicks on the best plan, per two restarts
KICKS_PER_RESTART = 0.5

# Most visits removed by one kick
KICK_SIZE = 3

# (vehicle, site, position, added length)
Insertion = Tuple[int, int, int, float]


@dataclass
class _Plan:
    """Mutable working solution over local site indices."""

    routes: List[List[int]]
    lengths: List[float]
    loads: List[float]
    counts: np.ndarray
    value: float = 0.0

    def copy(self) -> _Plan:
        return _Plan(
            routes=[list(r) for r in self.routes],
            lengths=list(self.lengths),
            loads=list(self.loads),
            counts=self.counts.copy(),
            value=self.value,
        )


@dataclass
class _Search:
    instance: VrppInstance
    dist: np.ndarray = field(init=False)
    limits: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.dist = self.instance.distances
        self.limits = np.array(
            [
                self.instance.visit_limit(k)
                for k in range(self.instance.num_sites)
            ],
            dtype=int,
        )

    @property
    def cost(self) -> float:
        return self.instance.travel_cost

    def objective(self, plan: _Plan) -> float:
        return plan.value - self.cost * sum(plan.lengths)

    def empty(self) -> _Plan:
        m = self.instance.num_vehicles
        return _Plan(
            routes=[[] for _ in range(m)],
            lengths=[0.0] * m,
            loads=[0.0] * m,
            counts=np.zeros(self.instance.num_sites, dtype=int),
        )

    # -- geometry helpers ------------------------------------------------

    def _nodes(self, route: List[int]) -> List[int]:
        return [0] + [k + 1 for k in route] + [0]

    def _insertion_deltas(self, route: List[int]) -> np.ndarray:
        """Added length of inserting each site at each position.

        Row p inserts between node p and node p+1 of the depot-closed
        route; column k is local site k.
        """
        nodes = self._nodes(route)
        prev = np.array(nodes[:-1])
        nxt = np.array(nodes[1:])
        return (
            self.dist[prev, 1:]
            + self.dist[1:, nxt].T
            - self.dist[prev, nxt][:, None]
        )

    def _removal_saving(self, route: List[int], i: int) -> float:
        nodes = self._nodes(route)
        a, b, c = nodes[i], nodes[i + 1], nodes[i + 2]
        return float(
            self.dist[a, b] + self.dist[b, c] - self.dist[a, c]
        )

    def _open_sites(
        self, plan: _Plan, m: int, load: float, exclude: List[int]
    ) -> np.ndarray:
        """Sites vehicle m could still take, given its load."""
        inst = self.instance
        ok = plan.counts < self.limits
        ok &= inst.demands + load <= inst.capacities[m] + FEASIBILITY_TOL
        ok[exclude] = False
        return ok

    # -- moves -----------------------------------------------------------

    def insertions(self, plan: _Plan) -> List[Insertion]:
        """Every feasible insertion with positive objective gain."""
        inst = self.instance
        out: List[Insertion] = []
        for m, route in enumerate(plan.routes):
            ok = self._open_sites(plan, m, plan.loads[m], route)
            if not ok.any():
                continue
            deltas = self._insertion_deltas(route)
            fits = (
                plan.lengths[m] + deltas
                <= inst.max_distances[m] + FEASIBILITY_TOL
            )
            gains = inst.values[None, :] - self.cost * deltas
            mask = fits & ok[None, :] & (gains > EPS)
            for p, k in zip(*np.nonzero(mask)):
                out.append((m, int(k), int(p), float(deltas[p, k])))
        return out

    def insert(self, plan: _Plan, move: Insertion) -> None:
        m, k, p, delta = move
        plan.routes[m].insert(p, k)
        plan.lengths[m] += delta
        plan.loads[m] += float(self.instance.demands[k])
        plan.counts[k] += 1
        plan.value += float(self.instance.values[k])

    def remove(self, plan: _Plan, m: int, i: int) -> int:
        saving = self._removal_saving(plan.routes[m], i)
        k = plan.routes[m].pop(i)
        plan.lengths[m] -= saving
        plan.loads[m] -= float(self.instance.demands[k])
        plan.counts[k] -= 1
        plan.value -= float(self.instance.values[k])
        return k

    def best_add(self, plan: _Plan) -> bool:
        """Insert the unvisited site with the largest gain."""
        best: Optional[Tuple[float, Insertion]] = None
        for move in self.insertions(plan):
            m, k, p, delta = move
            gain = float(self.instance.values[k]) - self.cost * delta
            if best is None or gain > best[0] + EPS:
                best = (gain, move)
        if best is None:
            return False
        self.insert(plan, best[1])
        return True

    def pair_add(self, plan: _Plan) -> bool:
        """Insert two adjacent sites whose joint gain is positive.

        Catches clusters where no single site pays for its detour.
        """
        inst = self.instance
        best: Optional[Tuple[float, int, int, int, int]] = None
        for m, route in enumerate(plan.routes):
            ok = self._open_sites(plan, m, plan.loads[m], route)
            idx = np.flatnonzero(ok)
            if idx.size < 2:
                continue
            demands = inst.demands[idx]
            pair_ok = (
                plan.loads[m] + demands[:, None] + demands[None, :]
                <= inst.capacities[m] + FEASIBILITY_TOL
            )
            np.fill_diagonal(pair_ok, False)
            value = inst.values[idx][:, None] + inst.values[idx][None, :]
            inner = self.dist[np.ix_(idx + 1, idx + 1)]
            nodes = self._nodes(route)
            for p in range(len(nodes) - 1):
                a, b = nodes[p], nodes[p + 1]
                delta = (
                    self.dist[a, idx + 1][:, None]
                    + inner
                    + self.dist[idx + 1, b][None, :]
                    - self.dist[a, b]
                )
                fits = (
                    plan.lengths[m] + delta
                    <= inst.max_distances[m] + FEASIBILITY_TOL
                )
                gains = np.where(
                    pair_ok & fits, value - self.cost * delta, -np.inf
                )
                i, j = np.unravel_index(int(np.argmax(gains)), gains.shape)
                gain = float(gains[i, j])
                if gain > EPS and (best is None or gain > best[0] + EPS):
                    best = (gain, m, p, int(idx[i]), int(idx[j]))
        if best is None:
            return False
        _, m, p, k, other = best
        self._insert_at(plan, m, k, p)
        self._insert_at(plan, m, other, p + 1)
        return True

    def best_drop(self, plan: _Plan) -> bool:
        """Remove the visit whose travel saving exceeds its value most."""
        best: Optional[Tuple[float, int, int]] = None
        for m, route in enumerate(plan.routes):
            for i, k in enumerate(route):
                gain = (
                    self.cost * self._removal_saving(route, i)
                    - float(self.instance.values[k])
                )
                if gain > EPS and (best is None or gain > best[0] + EPS):
                    best = (gain, m, i)
        if best is None:
            return False
        self.remove(plan, best[1], best[2])
        return True

    def two_opt(self, plan: _Plan) -> bool:
        """Reverse route segments while that shortens a route."""
        improved = False
        for m, route in enumerate(plan.routes):
            while len(route) >= 2:
                nodes = self._nodes(route)
                best, arg = -EPS, None
                for i in range(1, len(nodes) - 2):
                    for j in range(i + 1, len(nodes) - 1):
                        delta = (
                            self.dist[nodes[i - 1], nodes[j]]
                            + self.dist[nodes[i], nodes[j + 1]]
                            - self.dist[nodes[i - 1], nodes[i]]
                            - self.dist[nodes[j], nodes[j + 1]]
                        )
                        if delta < best:
                            best, arg = delta, (i, j)
                if arg is None:
                    break
                i, j = arg
                route[i - 1:j] = route[i - 1:j][::-1]
                plan.lengths[m] += best
                improved = True
        return improved

    def relocate(self, plan: _Plan) -> bool:
        """Move one visit to its cheapest position in any route."""
        inst = self.instance
        best: Optional[Tuple[float, int, int, int, int, float]] = None
        for a, route in enumerate(plan.routes):
            for i, k in enumerate(route):
                saving = self._removal_saving(route, i)
                rest = route[:i] + route[i + 1:]
                for b in range(inst.num_vehicles):
                    if b == a:
                        target = rest
                        length = plan.lengths[a] - saving
                        load = plan.loads[a] - float(inst.demands[k])
                    else:
                        target = plan.routes[b]
                        if k in target:
                            continue
                        length = plan.lengths[b]
                        load = plan.loads[b]
                    if (
                        load + inst.demands[k]
                        > inst.capacities[b] + FEASIBILITY_TOL
                    ):
                        continue
                    deltas = self._insertion_deltas(target)[:, k]
                    for p, delta in enumerate(deltas):
                        if b == a and p == i:
                            continue
                        if (
                            length + delta
                            > inst.max_distances[b] + FEASIBILITY_TOL
                        ):
                            continue
                        gain = self.cost * (saving - float(delta))
                        if gain > EPS and (
                            best is None or gain > best[0] + EPS
                        ):
                            best = (gain, a, i, b, p, float(delta))
        if best is None:
            return False
        _, a, i, b, p, delta = best
        k = self.remove(plan, a, i)
        self.insert(plan, (b, k, p, delta))
        return True

    def exchange(self, plan: _Plan) -> bool:
        """Swap two visits between different routes."""
        inst = self.instance
        d = self.dist
        best: Optional[Tuple[float, int, int, int, int]] = None
        for a in range(inst.num_vehicles):
            ra = plan.routes[a]
            na = self._nodes(ra)
            for b in range(a + 1, inst.num_vehicles):
                rb = plan.routes[b]
                nb = self._nodes(rb)
                for i, k in enumerate(ra):
                    if k in rb:
                        continue
                    pa, sa = na[i], na[i + 2]
                    for j, other in enumerate(rb):
                        if other in ra:
                            continue
                        pb, sb = nb[j], nb[j + 2]
                        da = (
                            d[pa, other + 1] + d[other + 1, sa]
                            - d[pa, k + 1] - d[k + 1, sa]
                        )
                        db = (
                            d[pb, k + 1] + d[k + 1, sb]
                            - d[pb, other + 1] - d[other + 1, sb]
                        )
                        if (
                            plan.lengths[a] + da
                            > inst.max_distances[a] + FEASIBILITY_TOL
                            or plan.lengths[b] + db
                            > inst.max_distances[b] + FEASIBILITY_TOL
                        ):
                            continue
                        shift = float(inst.demands[other] - inst.demands[k])
                        if (
                            plan.loads[a] + shift
                            > inst.capacities[a] + FEASIBILITY_TOL
                            or plan.loads[b] - shift
                            > inst.capacities[b] + FEASIBILITY_TOL
                        ):
                            continue
                        gain = -self.cost * float(da + db)
                        if gain > EPS and (
                            best is None or gain > best[0] + EPS
                        ):
                            best = (gain, a, i, b, j)
        if best is None:
            return False
        _, a, i, b, j = best
        k = self.remove(plan, a, i)
        other = self.remove(plan, b, j)
        self._insert_at(plan, a, other, i)
        self._insert_at(plan, b, k, j)
        return True

    def replace(self, plan: _Plan) -> bool:
        """Trade one visit for a site the route does not serve."""
        inst = self.instance
        best: Optional[Tuple[float, int, int, int, int, float]] = None
        for m, route in enumerate(plan.routes):
            for i, k in enumerate(route):
                saving = self._removal_saving(route, i)
                rest = route[:i] + route[i + 1:]
                load = plan.loads[m] - float(inst.demands[k])
                length = plan.lengths[m] - saving
                ok = self._open_sites(plan, m, load, route)
                if not ok.any():
                    continue
                deltas = self._insertion_deltas(rest)
                fits = (
                    length + deltas
                    <= inst.max_distances[m] + FEASIBILITY_TOL
                )
                gains = (
                    inst.values[None, :]
                    - float(inst.values[k])
                    - self.cost * (deltas - saving)
                )
                gains = np.where(fits & ok[None, :], gains, -np.inf)
                flat = int(np.argmax(gains))
                p, other = np.unravel_index(flat, gains.shape)
                gain = float(gains[p, other])
                if gain > EPS and (best is None or gain > best[0] + EPS):
                    best = (gain, m, i, int(other), int(p),
                            float(deltas[p, other]))
        if best is None:
            return False
        _, m, i, other, p, delta = best
        self.remove(plan, m, i)
        self.insert(plan, (m, other, p, delta))
        return True

    def _insert_at(self, plan: _Plan, m: int, k: int, p: int) -> None:
        delta = float(self._insertion_deltas(plan.routes[m])[p, k])
        self.insert(plan, (m, k, p, delta))

    # -- driver ----------------------------------------------------------

    def construct(
        self,
        rng: Optional[np.random.Generator],
        plan: Optional[_Plan] = None,
    ) -> _Plan:
        """Greedy (rng None) or randomized value-per-cost insertion.

        Extends ``plan`` in place when given, else starts empty.
        """
        if plan is None:
            plan = self.empty()
        values = self.instance.values
        while True:
            moves = self.insertions(plan)
            if not moves:
                return plan
            scored = sorted(
                (
                    (
                        -float(values[k])
                        / (self.cost * delta + COST_FLOOR),
                        k,
                        m,
                        p,
                    ),
                    (m, k, p, delta),
                )
                for m, k, p, delta in moves
            )
            if rng is None:
                choice = scored[0][1]
            else:
                top = -scored[0][0][0]
                bottom = -scored[-1][0][0]
                threshold = top - RCL_ALPHA * (top - bottom)
                rcl = [mv for key, mv in scored if -key[0] >= threshold]
                choice = rcl[int(rng.integers(len(rcl)))]
            self.insert(plan, choice)

    def improve(self, plan: _Plan) -> _Plan:
        """Local search until no neighbourhood gains."""
        moves: List[Callable[[_Plan], bool]] = [
            self.two_opt,
            self.relocate,
            self.exchange,
            self.best_drop,
            self.best_add,
            self.pair_add,
            self.replace,
        ]
        improved = True
        while improved:
            improved = False
            for move in moves:
                if move(plan):
                    improved = True
        return plan

    def kick(self, plan: _Plan, rng: np.random.Generator) -> _Plan:
        """Ruin-and-recreate: drop random visits, refill, search again.

        Returns a new plan; ``plan`` is left untouched.
        """
        trial = plan.copy()
        visits = [
            (m, i) for m, route in enumerate(trial.routes)
            for i in range(len(route))
        ]
        if visits:
            size = int(rng.integers(1, min(KICK_SIZE, len(visits)) + 1))
            picked = rng.choice(len(visits), size=size, replace=False)
            # Highest positions first keeps earlier indices valid
            for m, i in sorted(
                (visits[int(j)] for j in picked), reverse=True
            ):
                self.remove(trial, m, i)
        return self.improve(self.construct(rng, trial))


def solve_heuristic(
    instance: VrppInstance,
    rng: np.random.Generator,
    budget: int = DEFAULT_BUDGET,
) -> VrppSolution:
    """Best of ``budget`` GRASP restarts, improved by ruin-and-recreate.

    Raises:
        ContractError: if budget is below 1
        SolverError: if the search produced an infeasible solution
    """
    if budget < 1:
        raise ContractError(f"Solver budget must be at least 1, got {budget}")
    if instance.num_sites == 0:
        return VrppSolution.empty(instance.num_vehicles)

    search = _Search(instance)
    best: Optional[_Plan] = None
    best_obj = 0.0
    for it in range(budget):
        plan = search.improve(search.construct(None if it == 0 else rng))
        obj = search.objective(plan)
        if best is None or obj > best_obj + EPS:
            best, best_obj = plan.copy(), obj

    assert best is not None
    for _ in range(max(1, int(budget * KICKS_PER_RESTART))):
        trial = search.kick(best, rng)
        trial_obj = search.objective(trial)
        if trial_obj > best_obj + EPS:
            best, best_obj = trial, trial_obj

    solution = VrppSolution(
        routes=[
            canonical_route([instance.site_ids[k] for k in route])
            for route in best.routes
        ]
    )
    violations = validate_solution(instance, solution)
    if violations:
        raise SolverError(
            f"Heuristic produced an infeasible solution: {violations}"
        )
    solution.objective = objective_value(instance, solution)
    logger.debug(
        f"Heuristic {instance.mode.value} solve: {instance.num_sites} "
        f"sites, {solution.num_visits} visits, "
        f"objective {solution.objective:.4f}"
    )
    return solution
