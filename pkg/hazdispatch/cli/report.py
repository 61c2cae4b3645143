"""Strategy comparison report."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from ..core.exceptions import (
    ConfigurationError,
    ReportError,
    ValidationError,
)
from ..core.policy import StrategyKind
from .runner import EpisodeOutput, RunSpec, prepare_out_dir, run_jobs

logger = logging.getLogger(__name__)

METRICS = [
    "termination_round",
    "cumulative_hazard",
    "cleaning_rate",
    "final_mae",
]

# Relative tolerance when re-deriving aggregates from rows
AGGREGATE_RTOL = 1e-9


class ReportRow(BaseModel):
    """Headline metrics of one (strategy, seed) episode."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    strategy: str
    kind: StrategyKind
    seed: int
    termination_round: int
    cumulative_hazard: float
    cleaning_rate: float
    final_mae: float
    completed: bool


class AggregateRow(BaseModel):
    """Mean, sample std and median of one metric for one strategy."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    strategy: str
    metric: str
    mean: float
    std: float
    median: float
    count: int


class Report(BaseModel):
    """Per-episode rows, per-strategy aggregates and comparisons."""

    model_config = ConfigDict(extra="forbid")

    type: str = "report"
    scenario: str
    rows: List[ReportRow]
    aggregates: List[AggregateRow]
    reduction_vs_baseline: Dict[str, float] = Field(
        default_factory=dict,
        description="Percent fewer mean rounds for bucb than each baseline",
    )
    closest_to_oracle: Dict[str, str] = Field(default_factory=dict)

    @classmethod
    def build(cls, rows: Sequence[ReportRow], scenario: str) -> Report:
        aggregates = aggregate_rows(rows)
        return cls(
            scenario=scenario,
            rows=list(rows),
            aggregates=aggregates,
            reduction_vs_baseline=termination_reduction(rows, aggregates),
            closest_to_oracle=closest_to_oracle(rows, aggregates),
        )

    def frame(self) -> pd.DataFrame:
        """Aggregates as a wide table, one row per strategy."""
        df = pd.DataFrame([a.model_dump() for a in self.aggregates])
        if df.empty:
            return df
        wide = df.pivot(
            index="strategy", columns="metric", values=["mean", "std"]
        )
        wide.columns = [f"{metric}_{stat}" for stat, metric in wide.columns]
        return wide.reset_index()

    def save(self, path: Union[str, Path]) -> None:
        """Write the report as JSON and its aggregate table as CSV."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write(self.model_dump_json(indent=2) + "\n")
        self.frame().to_csv(path.with_suffix(".csv"), index=False)

    @classmethod
    def load(cls, path: Union[str, Path]) -> Report:
        """Read a report and check its aggregates against its rows.

        Raises:
            ValidationError: if the file is not a report
            ReportError: if the aggregates do not match the rows
        """
        try:
            with open(path, "r") as f:
                report = cls.model_validate(json.load(f))
        except (json.JSONDecodeError, pydantic.ValidationError) as e:
            raise ValidationError(f"Invalid report {path}: {e}") from e
        report.check_consistency()
        return report

    def check_consistency(self) -> None:
        expected = {
            (a.strategy, a.metric): a for a in aggregate_rows(self.rows)
        }
        stored = {(a.strategy, a.metric): a for a in self.aggregates}
        if expected.keys() != stored.keys():
            raise ReportError("Report aggregates do not cover its rows")
        for key, want in expected.items():
            got = stored[key]
            for stat in ("mean", "std", "median"):
                a, b = getattr(got, stat), getattr(want, stat)
                if not math.isclose(a, b, rel_tol=AGGREGATE_RTOL,
                                    abs_tol=1e-12):
                    raise ReportError(
                        f"Aggregate {stat} of {key[1]} for {key[0]} is "
                        f"{a}, rows give {b}"
                    )


def aggregate_rows(rows: Sequence[ReportRow]) -> List[AggregateRow]:
    """Mean, sample std (0 for one seed) and median per strategy."""
    if not rows:
        return []
    df = pd.DataFrame([r.model_dump() for r in rows])
    grouped = df.groupby("strategy", sort=True)[METRICS]
    stats = grouped.agg(["mean", "std", "median", "count"])

    out = []
    for strategy in stats.index:
        for metric in METRICS:
            std = stats.loc[strategy, (metric, "std")]
            out.append(
                AggregateRow(
                    strategy=str(strategy),
                    metric=metric,
                    mean=float(stats.loc[strategy, (metric, "mean")]),
                    std=0.0 if pd.isna(std) else float(std),
                    median=float(stats.loc[strategy, (metric, "median")]),
                    count=int(stats.loc[strategy, (metric, "count")]),
                )
            )
    return out


def _first_label(rows: Sequence[ReportRow], kind: StrategyKind) -> str:
    for r in rows:
        if r.kind is kind:
            return r.strategy
    return ""


def _means(
    aggregates: Sequence[AggregateRow], metric: str
) -> Dict[str, float]:
    return {a.strategy: a.mean for a in aggregates if a.metric == metric}


def termination_reduction(
    rows: Sequence[ReportRow], aggregates: Sequence[AggregateRow]
) -> Dict[str, float]:
    """Percent reduction of bucb mean T_end vs random and round_robin."""
    means = _means(aggregates, "termination_round")
    bucb = _first_label(rows, StrategyKind.BUCB)
    if not bucb:
        return {}
    out = {}
    for kind in (StrategyKind.RANDOM, StrategyKind.ROUND_ROBIN):
        label = _first_label(rows, kind)
        if label and means[label] > 0:
            out[kind.value] = 100.0 * (means[label] - means[bucb]) / (
                means[label]
            )
    return out


def closest_to_oracle(
    rows: Sequence[ReportRow], aggregates: Sequence[AggregateRow]
) -> Dict[str, str]:
    """Per metric, the non-oracle strategy whose mean is nearest oracle's."""
    oracle = _first_label(rows, StrategyKind.ORACLE)
    if not oracle:
        return {}
    oracle_labels = {r.strategy for r in rows if r.kind is StrategyKind.ORACLE}
    out = {}
    for metric in METRICS:
        means = _means(aggregates, metric)
        others = sorted(s for s in means if s not in oracle_labels)
        if others:
            out[metric] = min(
                others, key=lambda s: abs(means[s] - means[oracle])
            )
    return out


def report_rows(outputs: Sequence[EpisodeOutput]) -> List[ReportRow]:
    rows = []
    for out in outputs:
        metrics = out.summary.metrics
        rows.append(
            ReportRow(
                strategy=out.label,
                kind=StrategyKind(out.summary.config["strategy"]),
                seed=out.seed,
                **{m: metrics[m] for m in METRICS},
                completed=metrics["completed"],
            )
        )
    return rows


def cmd_compare(spec: RunSpec) -> Path:
    """Run every strategy over the seed range and write the report.

    Returns the path of the JSON report; the aggregate table is written
    next to it as CSV.

    Raises:
        ConfigurationError: if fewer than two strategies are listed
    """
    if len(spec.strategies) < 2:
        raise ConfigurationError(
            "compare needs at least two strategies, got "
            f"{len(spec.strategies)}",
            key="strategies",
        )
    prepare_out_dir(spec.out_dir)
    outputs = run_jobs(spec)
    scenario = (
        spec.preset
        if spec.preset is not None
        else str(spec.config_path) if spec.config_path else "scenario1"
    )
    report = Report.build(report_rows(outputs), scenario=scenario)
    path = spec.out_dir / "report.json"
    report.save(path)
    for baseline, pct in report.reduction_vs_baseline.items():
        logger.info(f"bucb needs {pct:.1f}% fewer rounds than {baseline}")
    return path
