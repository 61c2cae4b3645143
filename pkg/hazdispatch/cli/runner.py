"""Multi-seed replication of episodes and their output files."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import pandas as pd
import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import (
    PRESETS,
    ScenarioConfig,
    config_error,
    parse_config,
)
from ..core.policy import StrategyKind
from ..core.schema import SummaryDocument, dump_document
from ..sim.dispatch import EpisodeResult, run_episode

logger = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "round",
    "site",
    "hazard",
    "belief_mean",
    "belief_var",
    "sensed",
    "removed",
]


class RunSpec(BaseModel):
    """What to run and where to put it."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    config_path: Optional[Path] = None
    preset: Optional[str] = None
    seeds: Tuple[int, int] = (0, 0)
    strategies: List[StrategyKind] = Field(
        default_factory=lambda: [StrategyKind.BUCB], min_length=1
    )
    out_dir: Path = Path("results")
    format: Literal["json", "yaml"] = "json"
    budget: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_spec(self) -> RunSpec:
        """Seed range must be nonempty; config and preset exclude."""
        lo, hi = self.seeds
        if lo < 0 or lo > hi:
            raise ValueError(f"Seed range {lo}..{hi} is empty or negative")
        if self.config_path is not None and self.preset is not None:
            raise ValueError("Give either a config file or a preset")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"Unknown preset '{self.preset}'")
        return self

    @classmethod
    def from_options(cls, **options: Any) -> RunSpec:
        """Validated spec, with problems reported as configuration errors."""
        try:
            return cls(**options)
        except pydantic.ValidationError as e:
            raise config_error(e) from e

    @property
    def seed_list(self) -> List[int]:
        return list(range(self.seeds[0], self.seeds[1] + 1))

    @property
    def labels(self) -> List[str]:
        """One unique label per strategy entry (repeats get a suffix)."""
        seen: Dict[str, int] = {}
        out = []
        for kind in self.strategies:
            seen[kind.value] = seen.get(kind.value, 0) + 1
            n = seen[kind.value]
            out.append(kind.value if n == 1 else f"{kind.value}_{n}")
        return out

    def base_config(self) -> ScenarioConfig:
        if self.config_path is not None:
            config = parse_config(self.config_path)
        else:
            config = ScenarioConfig.preset(self.preset or "scenario1")
        if self.budget is not None:
            config = config.with_solver_budget(self.budget)
        return config

    def jobs(self) -> List[Tuple[str, ScenarioConfig]]:
        """(label, config) per strategy entry and seed, sorted."""
        base = self.base_config()
        out = [
            (label, base.with_overrides(strategy=kind.value, seed=seed))
            for label, kind in zip(self.labels, self.strategies)
            for seed in self.seed_list
        ]
        return sorted(out, key=lambda job: (job[0], job[1].seed))


@dataclass
class EpisodeOutput:
    """What a worker hands back for one episode."""

    label: str
    seed: int
    trace: pd.DataFrame
    summary: SummaryDocument


def trace_frame(result: EpisodeResult) -> pd.DataFrame:
    """One row per (round, site): post-cleaning truth and post-round belief."""
    rows: List[Dict[str, Any]] = []
    for record in result.records:
        sensed = set(record.sensed_sites)
        removed = record.removed_by_site
        for site in range(result.config.num_sites):
            rows.append(
                {
                    "round": record.round,
                    "site": site,
                    "hazard": float(record.truth_end[site]),
                    "belief_mean": float(record.belief_means[site]),
                    "belief_var": float(record.belief_vars[site]),
                    "sensed": int(site in sensed),
                    "removed": (
                        0.0 if removed is None else float(removed[site])
                    ),
                }
            )
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def summary_document(label: str, result: EpisodeResult) -> SummaryDocument:
    return SummaryDocument(
        strategy=label,
        seed=result.config.seed,
        config=result.config.to_dict(),
        metrics=result.metrics.model_dump(mode="json"),
    )


def run_job(label: str, config_data: Dict[str, Any]) -> EpisodeOutput:
    """Run one episode; module-level so a process pool can pickle it."""
    config = ScenarioConfig.from_dict(config_data)
    result = run_episode(config)
    return EpisodeOutput(
        label=label,
        seed=config.seed,
        trace=trace_frame(result),
        summary=summary_document(label, result),
    )


def run_jobs(spec: RunSpec) -> List[EpisodeOutput]:
    """Run every (strategy, seed) job, returned in sorted job order."""
    jobs = spec.jobs()
    logger.info(
        f"Running {len(jobs)} episodes with {spec.workers} worker(s)"
    )
    if spec.workers == 1:
        return [run_job(label, cfg.to_dict()) for label, cfg in jobs]

    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        futures = [
            pool.submit(run_job, label, cfg.to_dict()) for label, cfg in jobs
        ]
        # collected in submission order, so output does not depend on
        # completion order
        return [f.result() for f in futures]


def episode_paths(
    out_dir: Path, label: str, seed: int, fmt: str
) -> Tuple[Path, Path]:
    stem = f"{label}_seed{seed:04d}"
    return out_dir / f"{stem}_trace.csv", out_dir / f"{stem}_summary.{fmt}"


def prepare_out_dir(out_dir: Path) -> None:
    """Create the output directory and check it can be written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"Output directory not writable: {out_dir}")


def write_summary(doc: SummaryDocument, path: Path, fmt: str) -> None:
    if fmt == "yaml":
        with open(path, "w") as f:
            yaml.safe_dump(doc.model_dump(mode="json"), f, sort_keys=False)
    else:
        dump_document(doc, path)


def write_outputs(
    outputs: List[EpisodeOutput], spec: RunSpec
) -> List[Path]:
    """Write trace and summary files; on failure remove what was written."""
    written: List[Path] = []
    try:
        for out in outputs:
            trace_path, summary_path = episode_paths(
                spec.out_dir, out.label, out.seed, spec.format
            )
            written.append(trace_path)
            out.trace.to_csv(trace_path, index=False)
            written.append(summary_path)
            write_summary(out.summary, summary_path, spec.format)
    except Exception:
        remove_files(written)
        raise
    return written


def remove_files(paths: List[Path]) -> None:
    for path in paths:
        try:
            path.unlink()
        except FileNotFoundError:
            pass


def cmd_run(spec: RunSpec) -> List[Path]:
    """Run every job and write one trace and one summary per episode.

    Raises:
        ConfigurationError: on an invalid scenario or config file
        OSError: if the output directory cannot be written
    """
    prepare_out_dir(spec.out_dir)
    outputs = run_jobs(spec)
    paths = write_outputs(outputs, spec)
    logger.info(f"Wrote {len(paths)} files to {spec.out_dir}")
    return paths
