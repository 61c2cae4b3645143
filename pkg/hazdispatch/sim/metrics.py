"""Episode metrics."""

from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.config import ScenarioConfig
from ..core.exceptions import ContractError

if TYPE_CHECKING:
    from .dispatch import RoundRecord


class MetricSeries(BaseModel):
    """Per-round series up to the termination round, plus activity maps."""

    model_config = ConfigDict(frozen=True)

    remaining_hazard: List[float] = Field(default_factory=list)
    mae: List[float] = Field(default_factory=list)
    mean_variance: List[float] = Field(default_factory=list)
    sensing_ratio: List[Optional[float]] = Field(default_factory=list)
    removed: List[float] = Field(default_factory=list)
    removed_per_vehicle: List[List[float]] = Field(default_factory=list)
    sensing_visits: List[int] = Field(
        default_factory=list, description="Per-site sensing visit counts"
    )
    cleaning_visits: List[int] = Field(
        default_factory=list, description="Per-site cleaning visit counts"
    )


class Metrics(BaseModel):
    """Headline metrics of one episode."""

    model_config = ConfigDict(frozen=True)

    termination_round: int = Field(ge=1)
    cumulative_hazard: float = Field(ge=0)
    cleaning_rate: float = Field(ge=0)
    final_mae: float = Field(ge=0)
    completed: bool
    final_mean_variance: float = Field(ge=0)
    series: MetricSeries = Field(default_factory=MetricSeries)


def termination_round(
    records: Sequence[RoundRecord], max_rounds: int
) -> Optional[int]:
    """First round whose post-cleaning truth is all zero, if any."""
    for record in records:
        if record.round > max_rounds:
            break
        if np.all(record.truth_end == 0.0):
            return record.round
    return None


def compute_metrics(
    records: Sequence[RoundRecord], config: ScenarioConfig
) -> Metrics:
    """Termination round, cumulative hazard, cleaning rate and final MAE.

    Cumulative hazard sums the start-of-round truth over rounds
    1..T_end; the cleaning rate divides the actual removal over the same
    rounds by T_end; the final MAE compares post-round beliefs with the
    post-cleaning truth of round T_end.

    Raises:
        ContractError: if records is empty
    """
    if not records:
        raise ContractError("Cannot compute metrics without round records")

    clear_round = termination_round(records, config.max_rounds)
    t_end = clear_round if clear_round is not None else config.max_rounds
    window = [r for r in records if r.round <= t_end]
    last = window[-1]

    n = config.num_sites
    sensing_visits = np.zeros(n, dtype=int)
    cleaning_visits = np.zeros(n, dtype=int)
    for r in window:
        for obs in r.observations:
            sensing_visits[obs.site] += 1
        for visit in r.visits:
            cleaning_visits[visit.site] += 1

    series = MetricSeries(
        remaining_hazard=[float(r.truth_end.sum()) for r in window],
        mae=[
            float(np.mean(np.abs(r.belief_means - r.truth_end)))
            for r in window
        ],
        mean_variance=[float(np.mean(r.belief_vars)) for r in window],
        sensing_ratio=[r.sensing_ratio for r in window],
        removed=[r.removed for r in window],
        removed_per_vehicle=[list(r.removed_by_vehicle) for r in window],
        sensing_visits=sensing_visits.tolist(),
        cleaning_visits=cleaning_visits.tolist(),
    )

    return Metrics(
        termination_round=t_end,
        cumulative_hazard=float(sum(r.truth_start.sum() for r in window)),
        cleaning_rate=float(sum(r.removed for r in window)) / t_end,
        final_mae=series.mae[-1],
        completed=clear_round is not None,
        final_mean_variance=float(np.mean(last.belief_vars)),
        series=series,
    )
