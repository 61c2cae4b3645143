"""Ground truth of the hazard field.

Owns site geometry, hazard growth, noisy sensing and the physical effect of
cleaning visits. Every operation takes a state and returns a new one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError, ContractError, ValidationError

if TYPE_CHECKING:
    from .config import ScenarioConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SiteGeometry:
    """Static placement of a site (km, depot at origin)."""

    id: int
    position: Tuple[float, float]
    depot_distance: float


@dataclass(frozen=True)
class Observation:
    """One noisy hazard reading"""

    site: int
    value: float
    time: int


@dataclass
class CleaningVisit:
    """A UGV's stop at a site"""

    vehicle: int
    site: int
    planned_removal: float
    actual_removal: float = 0.0


@dataclass(frozen=True)
class EnvState:
    """Hidden hazard state of every site."""

    hazards: np.ndarray
    growth_rates: np.ndarray
    positions: np.ndarray
    saturation: float
    spatial_coeff: float
    noise_std: float
    round: int
    cleared: np.ndarray

    @property
    def num_sites(self) -> int:
        return int(self.hazards.shape[0])

    @property
    def all_clear(self) -> bool:
        return bool(np.all(self.hazards == 0.0))

    @property
    def total_hazard(self) -> float:
        return float(self.hazards.sum())


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of an (n, 2) array."""
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def init_environment(
    config: ScenarioConfig, rng: np.random.Generator
) -> Tuple[EnvState, List[SiteGeometry]]:
    """Sample site positions, initial hazards and growth rates."""
    env = config.environment
    lo, hi = env.map_bounds
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ConfigurationError(
            f"Invalid map bounds [{lo}, {hi}]", key="environment.map_bounds"
        )
    n = config.num_sites
    if n < 1:
        raise ConfigurationError(
            "At least one site is required", key="num_sites"
        )

    positions = rng.uniform(lo, hi, size=(n, 2))
    hazards = rng.uniform(*env.initial_hazard_range, size=n)
    growth_rates = rng.uniform(*env.growth_rate_range, size=n)

    state = EnvState(
        hazards=hazards,
        growth_rates=growth_rates,
        positions=positions,
        saturation=env.saturation,
        spatial_coeff=env.spatial_coeff,
        noise_std=env.noise_std,
        round=0,
        cleared=np.zeros(n, dtype=bool),
    )
    geometry = [
        SiteGeometry(
            id=i,
            position=(float(positions[i, 0]), float(positions[i, 1])),
            depot_distance=float(np.hypot(*positions[i])),
        )
        for i in range(n)
    ]
    logger.debug(
        f"Initialized {n} sites, total hazard {state.total_hazard:.2f}"
    )
    return state, geometry


def step_hazards(state: EnvState) -> EnvState:
    """Advance hazards one round: logistic growth plus spatial spillover.

    Confirmed-clean sites stay at zero and take no part in the coupling.
    """
    active = ~state.cleared
    h = np.where(active, state.hazards, 0.0)

    coupling = 1.0 / (pairwise_distances(state.positions) + 1.0)
    np.fill_diagonal(coupling, 0.0)
    spatial = state.spatial_coeff * (coupling @ h)

    logistic = state.growth_rates * h * (1.0 - h / state.saturation)
    new = np.clip(h + logistic + spatial, 0.0, state.saturation)
    new = np.where(active, new, 0.0)

    return replace(state, hazards=new, round=state.round + 1)


def observe(
    state: EnvState,
    sites: Sequence[int],
    rng: np.random.Generator,
    noise_std: Optional[float] = None,
) -> List[Observation]:
    """Noisy readings of the requested sites at the current round.

    Readings are not clamped; a negative value is a legitimate sensor
    output.
    """
    sites = [int(s) for s in sites]
    bad = [s for s in sites if not 0 <= s < state.num_sites]
    if bad:
        raise ValidationError(f"Site index out of range: {bad}")
    if not sites:
        return []

    sigma = state.noise_std if noise_std is None else noise_std
    noise = rng.normal(0.0, sigma, size=len(sites))
    return [
        Observation(
            site=s,
            value=float(state.hazards[s] + eps),
            time=state.round,
        )
        for s, eps in zip(sites, noise)
    ]


def apply_cleaning(
    state: EnvState,
    visits: Sequence[CleaningVisit],
    unit_capacity: Optional[float] = None,
) -> Tuple[EnvState, List[CleaningVisit], np.ndarray]:
    """Execute cleaning visits in order against the true hazards.

    Returns the new state, the executed visits (actual removal filled in)
    and a per-site flag that is true when a visited site ended at zero.
    """
    hazards = state.hazards.copy()
    visited = np.zeros(state.num_sites, dtype=bool)
    executed: List[CleaningVisit] = []

    for visit in visits:
        if not 0 <= visit.site < state.num_sites:
            raise ValidationError(f"Site index out of range: {visit.site}")
        if visit.planned_removal < 0 or (
            unit_capacity is not None
            and visit.planned_removal > unit_capacity + 1e-9
        ):
            raise ContractError(
                f"Planned removal {visit.planned_removal} at site "
                f"{visit.site} outside [0, {unit_capacity}]"
            )
        actual = min(visit.planned_removal, hazards[visit.site])
        hazards[visit.site] -= actual
        visited[visit.site] = True
        executed.append(replace(visit, actual_removal=float(actual)))

    fully_clean = visited & (hazards == 0.0)
    cleared = state.cleared | fully_clean
    return (
        replace(state, hazards=hazards, cleared=cleared),
        executed,
        fully_clean,
    )
