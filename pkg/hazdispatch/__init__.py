"""hazdispatch - hazard sensing and cleaning dispatch simulator."""

__version__ = "0.1.0"

from .core.config import ScenarioConfig, parse_config
from .core.exceptions import (
    ConfigurationError,
    ContractError,
    HazDispatchError,
    InstanceSizeError,
    ReportError,
    SolverError,
    ValidationError,
)
from .sim import EpisodeResult, Metrics, run_episode

__all__ = [
    "ConfigurationError",
    "ContractError",
    "EpisodeResult",
    "HazDispatchError",
    "InstanceSizeError",
    "Metrics",
    "ReportError",
    "ScenarioConfig",
    "SolverError",
    "ValidationError",
    "parse_config",
    "run_episode",
    "__version__",
]
