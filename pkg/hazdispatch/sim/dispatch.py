"""Round-based dispatch loop.

One round scores sites, routes the sensing fleet, folds the readings into
the beliefs, routes the cleaning fleet against the beliefs, executes the
cleaning against the true hazards and finally lets the hazards grow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.belief import (
    BeliefParams,
    SiteBelief,
    apply_planned_removal,
    boost_uncertainty,
    collapse_confirmed_clean,
    pin_to_truth,
    propagate_unobserved,
    refresh_gradient,
    tw_bayes_update,
)
from ..core.config import ScenarioConfig
from ..core.env import (
    CleaningVisit,
    EnvState,
    Observation,
    SiteGeometry,
    apply_cleaning,
    init_environment,
    observe,
    step_hazards,
)
from ..core.exceptions import ContractError, SolverError, wrap_errors
from ..core.policy import (
    StrategyKind,
    StrategyState,
    cleaning_targets,
    sensing_values,
)
from ..core.vrpp import (
    FleetConfig,
    RoutingMode,
    VrppInstance,
    VrppSolution,
    build_instance,
)
from ..solver import solve
from ..utils.rng import BASELINE, INIT, NOISE, SOLVER, episode_streams
from .metrics import Metrics, compute_metrics

logger = logging.getLogger(__name__)


@dataclass
class RoundRecord:
    """Everything that happened in one round.

    ``truth_start`` is the hazard field the round's decisions faced;
    ``truth_end`` is the field after cleaning, before growth. Belief
    arrays are the post-round beliefs.
    """

    round: int
    truth_start: np.ndarray
    truth_end: np.ndarray
    belief_means: np.ndarray
    belief_vars: np.ndarray
    sensing: VrppSolution = field(
        default_factory=lambda: VrppSolution(routes=[])
    )
    cleaning: VrppSolution = field(
        default_factory=lambda: VrppSolution(routes=[])
    )
    observations: List[Observation] = field(default_factory=list)
    visits: List[CleaningVisit] = field(default_factory=list)
    removed: float = 0.0
    removed_by_vehicle: List[float] = field(default_factory=list)
    removed_by_site: Optional[np.ndarray] = None
    sensing_ratio: Optional[float] = None
    residual_boost_sites: List[int] = field(default_factory=list)
    terminated: bool = False

    @property
    def sensed_sites(self) -> List[int]:
        return sorted({o.site for o in self.observations})

    @property
    def cleaned_sites(self) -> List[int]:
        return sorted({v.site for v in self.visits})


@dataclass
class EpisodeState:
    """Episode state between rounds.

    Random streams are shared with the states derived from this one.
    """

    config: ScenarioConfig
    params: BeliefParams
    env: EnvState
    geometry: List[SiteGeometry]
    beliefs: List[SiteBelief]
    strategy: StrategyState
    streams: Dict[str, np.random.Generator]
    sensing_fleet: FleetConfig
    cleaning_fleet: FleetConfig
    rounds_done: int = 0
    terminated: bool = False

    @property
    def finished(self) -> bool:
        return self.terminated or self.rounds_done >= self.config.max_rounds


@dataclass
class EpisodeResult:
    config: ScenarioConfig
    geometry: List[SiteGeometry]
    records: List[RoundRecord]
    metrics: Metrics


def start_episode(config: ScenarioConfig) -> EpisodeState:
    """Draw the environment and set every belief to the prior."""
    streams = episode_streams(config.seed)
    env, geometry = init_environment(config, streams[INIT])
    params = config.belief_params()
    v = config.vehicles
    return EpisodeState(
        config=config,
        params=params,
        env=env,
        geometry=geometry,
        beliefs=[SiteBelief.prior(params) for _ in range(config.num_sites)],
        strategy=StrategyState.create(config.strategy, config.num_sites),
        streams=streams,
        sensing_fleet=FleetConfig.homogeneous(
            config.num_uavs, max_distance=v.max_distance
        ),
        cleaning_fleet=FleetConfig.homogeneous(
            config.num_ugvs, capacity=v.capacity
        ),
    )


@wrap_errors(SolverError, "Routing solve failed")
def _solve_phase(
    instance: VrppInstance, state: EpisodeState
) -> VrppSolution:
    return solve(instance, state.streams[SOLVER], state.config.solver)


def _update_beliefs(
    state: EpisodeState,
    beliefs: List[SiteBelief],
    observations: List[Observation],
) -> List[SiteBelief]:
    """Bayesian update for observed sites, propagation for the rest."""
    params = state.params
    now = state.env.round
    by_site: Dict[int, List[Observation]] = {}
    for obs in observations:
        by_site.setdefault(obs.site, []).append(obs)

    updated = list(beliefs)
    for i, belief in enumerate(beliefs):
        if state.env.cleared[i]:
            continue
        if i in by_site:
            for obs in by_site[i]:
                belief = belief.observe(obs)
            belief = refresh_gradient(belief, params)
            updated[i] = tw_bayes_update(belief, now, params)
        else:
            updated[i] = propagate_unobserved(belief, 1, params)
    return updated


def _cleaning_instance(
    state: EpisodeState, beliefs: List[SiteBelief]
) -> VrppInstance:
    v = state.config.vehicles
    n = state.config.num_sites
    # baselines plan on the mean alone
    confidence = (
        v.cleaning_confidence
        if state.strategy.kind is StrategyKind.BUCB
        else 0.0
    )
    targets = cleaning_targets(
        beliefs,
        v.unit_capacity,
        eligible=~state.env.cleared,
        confidence=confidence,
    )
    rewards = np.zeros(n)
    demands = np.zeros(n)
    limits = np.ones(n, dtype=int)
    for t in targets:
        rewards[t.site] = t.reward
        demands[t.site] = t.demand
        limits[t.site] = t.visit_limit(v.unit_capacity)
    return build_instance(
        rewards,
        state.geometry,
        state.cleaning_fleet,
        RoutingMode.CLEANING,
        travel_cost=v.travel_cost,
        demands=demands,
        visit_limits=limits if v.limit_cleaning_visits else None,
    )


def run_round(state: EpisodeState) -> Tuple[RoundRecord, EpisodeState]:
    """Execute one round; returns its record and the next state.

    Raises:
        ContractError: if the episode already finished
        SolverError: if a routing solve fails unexpectedly
    """
    if state.finished:
        raise ContractError("Episode already finished")

    config = state.config
    v = config.vehicles
    params = state.params
    env = state.env
    round_no = state.rounds_done + 1
    truth_start = env.hazards.copy()
    oracle = state.strategy.kind is StrategyKind.ORACLE
    strategy = replace(state.strategy, counts=state.strategy.counts.copy())

    beliefs = list(state.beliefs)
    if oracle:
        beliefs = [
            pin_to_truth(b, h) if not env.cleared[i] else b
            for i, (b, h) in enumerate(zip(beliefs, truth_start))
        ]

    # sensing
    values = sensing_values(
        strategy,
        beliefs,
        state.geometry,
        state.streams[BASELINE],
        beta=v.beta,
        kappa=v.kappa,
        cleared=env.cleared,
        truth=truth_start if oracle else None,
    )
    sensing_instance = build_instance(
        values,
        state.geometry,
        state.sensing_fleet,
        RoutingMode.SENSING,
        travel_cost=v.travel_cost,
    )
    sensing = _solve_phase(sensing_instance, state)
    observations = observe(env, sensing.visited, state.streams[NOISE])
    strategy.record_sensing([o.site for o in observations])

    if not oracle:
        beliefs = _update_beliefs(state, beliefs, observations)

    # cleaning
    cleaning_instance = _cleaning_instance(state, beliefs)
    cleaning = _solve_phase(cleaning_instance, state)
    demand_of = dict(
        zip(cleaning_instance.site_ids, cleaning_instance.demands)
    )
    planned = [
        CleaningVisit(vehicle=m, site=s, planned_removal=float(demand_of[s]))
        for m, route in enumerate(cleaning.routes)
        for s in route
    ]
    env, executed, fully_clean = apply_cleaning(
        env, planned, unit_capacity=v.unit_capacity
    )

    removed_by_vehicle = [0.0] * config.num_ugvs
    removed_by_site = np.zeros(config.num_sites)
    for visit in executed:
        beliefs[visit.site] = apply_planned_removal(
            beliefs[visit.site], visit.planned_removal, params
        )
        removed_by_vehicle[visit.vehicle] += visit.actual_removal
        removed_by_site[visit.site] += visit.actual_removal

    boosted = []
    for site in sorted({visit.site for visit in executed}):
        if fully_clean[site]:
            beliefs[site] = collapse_confirmed_clean(beliefs[site])
        elif beliefs[site].mean == 0.0 and env.hazards[site] > 0.0:
            beliefs[site] = boost_uncertainty(beliefs[site], params)
            boosted.append(site)

    truth_end = env.hazards.copy()
    terminated = env.all_clear
    if not terminated:
        env = step_hazards(env)

    sensed = {o.site for o in observations}
    touched = sensed | {visit.site for visit in executed}
    record = RoundRecord(
        round=round_no,
        truth_start=truth_start,
        truth_end=truth_end,
        belief_means=np.array([b.mean for b in beliefs]),
        belief_vars=np.array([b.variance for b in beliefs]),
        sensing=sensing,
        cleaning=cleaning,
        observations=observations,
        visits=executed,
        removed=float(sum(visit.actual_removal for visit in executed)),
        removed_by_vehicle=removed_by_vehicle,
        removed_by_site=removed_by_site,
        sensing_ratio=len(sensed) / len(touched) if touched else None,
        residual_boost_sites=boosted,
        terminated=terminated,
    )
    logger.debug(
        f"Round {round_no}: sensed {len(sensed)}, cleaned "
        f"{len(record.cleaned_sites)}, removed {record.removed:.2f}, "
        f"remaining {float(truth_end.sum()):.2f}"
    )

    next_state = replace(
        state,
        env=env,
        beliefs=beliefs,
        strategy=strategy,
        rounds_done=round_no,
        terminated=terminated,
    )
    return record, next_state


def run_episode(config: ScenarioConfig) -> EpisodeResult:
    """Run rounds until every hazard is gone or the round limit is hit."""
    state = start_episode(config)
    records: List[RoundRecord] = []
    while not state.finished:
        record, state = run_round(state)
        records.append(record)

    metrics = compute_metrics(records, config)
    logger.info(
        f"Episode {config.strategy.value} seed {config.seed}: "
        f"T_end={metrics.termination_round}, "
        f"cumulative hazard {metrics.cumulative_hazard:.2f}, "
        f"final MAE {metrics.final_mae:.3f}"
    )
    return EpisodeResult(
        config=config,
        geometry=state.geometry,
        records=records,
        metrics=metrics,
    )
