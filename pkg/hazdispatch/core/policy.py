"""Visit values for the sensing and cleaning routing problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .belief import SiteBelief
from .env import SiteGeometry
from .exceptions import ConfigurationError, ContractError


class StrategyKind(str, Enum):
    """How sensing visit values are assigned."""

    BUCB = "bucb"
    RANDOM = "random"
    ROUND_ROBIN = "round_robin"
    ORACLE = "oracle"


@dataclass
class StrategyState:
    """Sensing strategy plus the round-robin visit counts it owns."""

    kind: StrategyKind
    counts: np.ndarray

    @classmethod
    def create(cls, kind: StrategyKind, num_sites: int) -> StrategyState:
        return cls(kind=StrategyKind(kind),
                   counts=np.zeros(num_sites, dtype=int))

    def record_sensing(self, sites: Sequence[int]) -> None:
        """Count one sensing visit per site (between rounds only)."""
        for s in sites:
            self.counts[s] += 1


@dataclass(frozen=True)
class SensingScore:
    site: int
    raw: float
    adjusted: float


@dataclass(frozen=True)
class CleaningTarget:
    """Expected reward and demand of one cleaning visit.

    ``estimate`` is the hazard the planner works with: the belief mean,
    raised by a multiple of the belief std when uncertainty counts.
    """

    site: int
    reward: float
    demand: float
    removable: float
    estimate: float = field(default=0.0, compare=False)

    def visit_limit(self, unit_capacity: float) -> int:
        """Full-capacity visits the estimate supports, at least one.

        A remainder below one unit waits for the next round instead of
        booking a whole visit.
        """
        return max(1, math.floor(self.estimate / unit_capacity + 1e-12))


def bucb_score(mean: float, variance: float, beta: float) -> float:
    """Bayesian upper confidence bound: mean + beta * std."""
    if variance < 0:
        raise ContractError(f"Variance must be non-negative, got {variance}")
    return mean + beta * math.sqrt(variance)


def distance_adjust(raw: float, depot_distance: float, kappa: float) -> float:
    """Discount a score by distance from the depot."""
    return raw / (1.0 + kappa * depot_distance)


def sensing_scores(
    beliefs: Sequence[SiteBelief],
    geometry: Sequence[SiteGeometry],
    beta: float,
    kappa: float,
) -> List[SensingScore]:
    """Raw and distance-adjusted BUCB score for every site."""
    scores = []
    for b, g in zip(beliefs, geometry):
        raw = bucb_score(b.mean, b.variance, beta)
        scores.append(
            SensingScore(
                site=g.id,
                raw=raw,
                adjusted=distance_adjust(raw, g.depot_distance, kappa),
            )
        )
    return scores


def round_robin_values(counts: np.ndarray, eligible: np.ndarray) -> np.ndarray:
    """(c_max - c_i + 1) / (c_max + 1) over eligible sites, 0 elsewhere."""
    values = np.zeros(counts.shape[0], dtype=float)
    if not eligible.any():
        return values
    c_max = counts[eligible].max()
    values[eligible] = (c_max - counts[eligible] + 1) / (c_max + 1)
    return values


def sensing_values(
    strategy: StrategyState,
    beliefs: Sequence[SiteBelief],
    geometry: Sequence[SiteGeometry],
    rng: np.random.Generator,
    beta: float,
    kappa: float,
    cleared: Optional[np.ndarray] = None,
    truth: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Per-site sensing visit value under the chosen strategy.

    Confirmed-clean sites get 0 under every strategy. The oracle expects
    beliefs already pinned to truth and needs truth to be supplied.
    """
    n = len(beliefs)
    eligible = (
        np.ones(n, dtype=bool) if cleared is None else ~np.asarray(cleared)
    )
    kind = strategy.kind

    if kind is StrategyKind.RANDOM:
        # full draw every round keeps the stream aligned across rounds
        values = rng.uniform(0.0, 1.0, size=n)
    elif kind is StrategyKind.ROUND_ROBIN:
        values = round_robin_values(strategy.counts, eligible)
    elif kind is StrategyKind.ORACLE:
        if truth is None:
            raise ConfigurationError(
                "Oracle strategy requires access to true hazards",
                key="strategy",
            )
        values = np.array(
            [
                distance_adjust(float(h), g.depot_distance, kappa)
                for h, g in zip(truth, geometry)
            ]
        )
    else:
        values = np.array(
            [s.adjusted for s in sensing_scores(beliefs, geometry, beta,
                                                kappa)]
        )

    return np.where(eligible, values, 0.0)


def cleaning_targets(
    beliefs: Sequence[SiteBelief],
    q_unit: float,
    eligible: Optional[Sequence[bool]] = None,
    confidence: float = 0.0,
) -> List[CleaningTarget]:
    """Reward estimate * min(estimate, q_unit), demand min(estimate, q_unit).

    The estimate is mean + confidence * std; confidence 0 plans on the
    mean alone. Sites with mean 0 are never targets.
    """
    if q_unit <= 0:
        raise ContractError(f"q_unit must be positive, got {q_unit}")
    if confidence < 0:
        raise ContractError(
            f"confidence must be non-negative, got {confidence}"
        )
    targets = []
    for i, b in enumerate(beliefs):
        if eligible is not None and not eligible[i]:
            continue
        if b.mean <= 0:
            continue
        estimate = b.mean + confidence * b.std
        removable = min(estimate, q_unit)
        targets.append(
            CleaningTarget(
                site=i,
                reward=estimate * removable,
                demand=removable,
                removable=removable,
                estimate=estimate,
            )
        )
    return targets
