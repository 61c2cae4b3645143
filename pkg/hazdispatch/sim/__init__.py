"""Episode simulation."""

from .dispatch import (
    EpisodeResult,
    EpisodeState,
    RoundRecord,
    run_episode,
    run_round,
    start_episode,
)
from .metrics import Metrics, MetricSeries, compute_metrics

__all__ = [
    "EpisodeResult",
    "EpisodeState",
    "MetricSeries",
    "Metrics",
    "RoundRecord",
    "compute_metrics",
    "run_episode",
    "run_round",
    "start_episode",
]
