"""Scenario configuration for hazdispatch."""

from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .belief import BeliefParams
from .exceptions import ConfigurationError
from .policy import StrategyKind

# Site and fleet counts of the built-in scenarios; everything else default
PRESETS: Dict[str, Dict[str, int]] = {
    "scenario1": {"num_sites": 20, "num_uavs": 2, "num_ugvs": 2},
    "scenario2": {"num_sites": 50, "num_uavs": 2, "num_ugvs": 2},
    "scenario3": {"num_sites": 50, "num_uavs": 2, "num_ugvs": 3},
}


def _ordered_range(v: Tuple[float, float], name: str) -> Tuple[float, float]:
    lo, hi = v
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"{name} must be finite, got {v}")
    if lo > hi:
        raise ValueError(f"{name} lower bound exceeds upper bound: {v}")
    return v


class EnvironmentConfig(BaseModel):
    """Hazard dynamics and sensing noise."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    saturation: float = Field(default=200.0, gt=0, description="K")
    spatial_coeff: float = Field(default=0.01, ge=0, description="phi")
    growth_rate_range: Tuple[float, float] = Field(default=(0.0, 0.1))
    initial_hazard_range: Tuple[float, float] = Field(default=(0.0, 100.0))
    noise_std: float = Field(default=5.0, gt=0, description="sigma_eps")
    map_bounds: Tuple[float, float] = Field(
        default=(-0.5, 0.5), description="Square map extent in km"
    )

    @field_validator("growth_rate_range", "initial_hazard_range")
    def validate_non_negative_range(
        cls, v: Tuple[float, float]
    ) -> Tuple[float, float]:
        """Ranges are ordered and non-negative."""
        _ordered_range(v, "range")
        if v[0] < 0:
            raise ValueError(f"range must be non-negative, got {v}")
        return v

    @field_validator("map_bounds")
    def validate_map_bounds(
        cls, v: Tuple[float, float]
    ) -> Tuple[float, float]:
        """Bounds are finite and ordered (a point map is allowed)."""
        return _ordered_range(v, "map_bounds")


class BeliefConfig(BaseModel):
    """Belief model parameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    decay: float = Field(default=0.5, gt=0, description="lambda")
    inflation: float = Field(default=0.5, ge=0, description="gamma")
    var_cap: float = Field(default=400.0, gt=0, description="sigma_max^2")
    smoothing: float = Field(default=0.3, ge=0, le=1, description="alpha")
    boost: float = Field(default=100.0, ge=0, description="zeta")
    prior_mean: float = Field(default=0.0, ge=0)
    prior_var: float = Field(default=100.0, gt=0)


class VehicleConfig(BaseModel):
    """Fleet and scoring parameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    max_distance: float = Field(
        default=1.5, gt=0, description="UAV route budget D_m (km)"
    )
    capacity: float = Field(
        default=100.0, gt=0, description="UGV cleaning capacity Q_m"
    )
    unit_capacity: float = Field(
        default=25.0, gt=0, description="Max removal per visit Q_unit"
    )
    travel_cost: float = Field(default=1.0, ge=0, description="c per km")
    kappa: float = Field(default=0.1, ge=0, description="Distance penalty")
    beta: float = Field(default=20.0, ge=0, description="BUCB exploration")
    cleaning_confidence: float = Field(
        default=2.0,
        ge=0,
        description="Belief stds added to the BUCB cleaning estimate",
    )
    limit_cleaning_visits: bool = Field(
        default=True,
        description="Cap UGV visits per site at full units of the estimate",
    )


class SolverConfig(BaseModel):
    """Routing solver selection."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    method: Literal["heuristic", "exact", "auto"] = "heuristic"
    budget: int = Field(default=20, ge=1, description="Heuristic restarts")
    exact_site_limit: int = Field(default=8, ge=0, le=12)


class ScenarioConfig(BaseModel):
    """Everything an episode needs, fully validated."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_sites: int = Field(default=20, ge=1)
    num_uavs: int = Field(default=2, ge=1)
    num_ugvs: int = Field(default=2, ge=1)
    max_rounds: int = Field(default=50, ge=1)
    strategy: StrategyKind = StrategyKind.BUCB
    seed: int = Field(default=0, ge=0)
    environment: EnvironmentConfig = Field(default_factory=EnvironmentConfig)
    belief: BeliefConfig = Field(default_factory=BeliefConfig)
    vehicles: VehicleConfig = Field(default_factory=VehicleConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("belief")
    def validate_belief(cls, v: BeliefConfig) -> BeliefConfig:
        """Prior variance must fit under the cap."""
        if v.prior_var > v.var_cap:
            raise ValueError(
                f"prior_var {v.prior_var} exceeds var_cap {v.var_cap}"
            )
        return v

    @classmethod
    def preset(cls, name: str) -> ScenarioConfig:
        """One of the built-in scenarios."""
        if name not in PRESETS:
            raise ConfigurationError(
                f"Unknown preset '{name}', expected one of "
                f"{', '.join(sorted(PRESETS))}",
                key="preset",
            )
        return cls(**PRESETS[name])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> ScenarioConfig:
        """Build from a nested mapping, expanding an optional preset key."""
        data = copy.deepcopy(data)
        preset = data.pop("preset", None)
        if preset is not None:
            base = cls.preset(str(preset)).to_dict()
            data = _deep_merge(base, data)
        try:
            return cls.model_validate(data)
        except pydantic.ValidationError as e:
            raise config_error(e) from e

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> ScenarioConfig:
        """Load configuration from YAML file."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Invalid YAML in {path}: {e}"
            ) from e
        except OSError as e:
            raise ConfigurationError(
                f"Cannot read config file {path}: {e}"
            ) from e

        if data is None:
            raise ConfigurationError(f"Invalid YAML in {path}: empty file")
        if not isinstance(data, dict):
            raise ConfigurationError(
                f"Invalid YAML in {path}: top level must be a mapping"
            )
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def to_yaml(self, path: Optional[Path] = None) -> str:
        """Serialize to YAML, optionally writing it to path."""
        text = yaml.safe_dump(self.to_dict(), sort_keys=False)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as f:
                f.write(text)
        return text

    def with_overrides(self, **fields: Any) -> ScenarioConfig:
        """Copy with top-level fields replaced and revalidated."""
        data = self.to_dict()
        for key, value in fields.items():
            if value is not None:
                data[key] = value
        return type(self).from_dict(data)

    def with_solver_budget(self, budget: int) -> ScenarioConfig:
        data = self.to_dict()
        data["solver"]["budget"] = budget
        return type(self).from_dict(data)

    def belief_params(self) -> BeliefParams:
        """Belief parameters with noise and clamp taken from the env."""
        b = self.belief
        return BeliefParams(
            decay=b.decay,
            noise_var=self.environment.noise_std**2,
            inflation=b.inflation,
            var_cap=b.var_cap,
            smoothing=b.smoothing,
            boost=b.boost,
            prior_mean=b.prior_mean,
            prior_var=b.prior_var,
            max_hazard=self.environment.saturation,
        )


def _deep_merge(
    base: Dict[str, Any], override: Dict[str, Any]
) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_error(error: pydantic.ValidationError) -> ConfigurationError:
    """Turn the first pydantic error into a diagnostic naming its key."""
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "<root>"
    if first["type"] == "extra_forbidden":
        return ConfigurationError(
            f"Unknown configuration key '{key}'", key=key
        )
    return ConfigurationError(
        f"Invalid value for '{key}': {first['msg']}", key=key
    )


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    """Load and validate a scenario configuration file."""
    return ScenarioConfig.from_yaml(path)
