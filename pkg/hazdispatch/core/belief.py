"""Per-site Gaussian hazard beliefs.

Each site carries a Gaussian belief over its latent hazard. Observed sites
are updated with a time-weighted Bayesian step over their recent readings;
unobserved sites are extrapolated along a smoothed hazard gradient while
their variance inflates toward a cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .env import Observation
from .exceptions import ContractError

# Observations lighter than this at the current round are dropped
WEIGHT_FLOOR = 1e-9

# Variance assigned to a site confirmed clean by a UGV
CONFIRMED_CLEAN_VAR = 1e-6


class BeliefParams(BaseModel):
    """Parameters of the belief model."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    decay: float = Field(default=0.5, gt=0, description="Time decay rate")
    noise_var: float = Field(
        default=25.0, gt=0, description="Observation noise variance"
    )
    inflation: float = Field(
        default=0.5, ge=0, description="Variance inflation rate"
    )
    var_cap: float = Field(default=400.0, gt=0, description="Variance cap")
    smoothing: float = Field(
        default=0.3, ge=0, le=1, description="Gradient smoothing weight"
    )
    boost: float = Field(
        default=100.0, ge=0, description="Residual hazard variance boost"
    )
    prior_mean: float = Field(default=0.0, ge=0)
    prior_var: float = Field(default=100.0, gt=0)
    max_hazard: float = Field(
        default=200.0, gt=0, description="Upper clamp of belief means"
    )

    @model_validator(mode="after")
    def validate_prior(self) -> BeliefParams:
        """Prior variance must not exceed the cap."""
        if self.prior_var > self.var_cap:
            raise ValueError(
                f"prior_var {self.prior_var} exceeds var_cap {self.var_cap}"
            )
        if self.prior_mean > self.max_hazard:
            raise ValueError(
                f"prior_mean {self.prior_mean} exceeds max_hazard "
                f"{self.max_hazard}"
            )
        return self


@dataclass(frozen=True)
class SiteBelief:
    """Gaussian belief over one site's hazard."""

    mean: float
    variance: float
    gradient: float = 0.0
    history: Tuple[Observation, ...] = field(default_factory=tuple)
    last_obs_round: Optional[int] = None

    @classmethod
    def prior(cls, params: BeliefParams) -> SiteBelief:
        """Belief before any observation."""
        return cls(mean=params.prior_mean, variance=params.prior_var)

    def observe(self, observation: Observation) -> SiteBelief:
        """Append a reading, keeping history sorted by time."""
        history = tuple(
            sorted(self.history + (observation,), key=lambda o: o.time)
        )
        return replace(self, history=history)

    @property
    def std(self) -> float:
        return math.sqrt(max(self.variance, 0.0))


def _clamp(value: float, params: BeliefParams) -> float:
    return min(max(value, 0.0), params.max_hazard)


def effective_sample_size(weights: np.ndarray) -> float:
    """Kish effective sample size (sum w)^2 / sum w^2.

    Lies in [1, n] for n positive weights.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0 or (weights <= 0).any():
        raise ContractError("Effective sample size needs positive weights")
    return float(weights.sum()) ** 2 / float(np.dot(weights, weights))


def tw_bayes_update(
    belief: SiteBelief, now: int, params: BeliefParams
) -> SiteBelief:
    """Time-weighted Bayesian update over the retained history.

    The current belief acts as the prior. Readings are weighted by
    exp(-decay * age); their spread sets an effective sample size that
    scales the evidence against the observation noise.
    """
    if not belief.history:
        raise ContractError(
            "tw_bayes_update needs at least one observation; "
            "use propagate_unobserved for unobserved sites"
        )

    times = np.array([o.time for o in belief.history], dtype=float)
    values = np.array([o.value for o in belief.history], dtype=float)
    weights = np.exp(-params.decay * (now - times))

    keep = weights >= WEIGHT_FLOOR
    if not keep.any():
        return replace(belief, history=())
    history = tuple(o for o, k in zip(belief.history, keep) if k)
    weights = weights[keep]
    values = values[keep]

    w_sum = float(weights.sum())
    y_bar = float(np.dot(weights, values)) / w_sum
    n_eff = effective_sample_size(weights)

    variance = 1.0 / (1.0 / belief.variance + n_eff / params.noise_var)
    mean = variance * (
        belief.mean / belief.variance + n_eff * y_bar / params.noise_var
    )

    return replace(
        belief,
        mean=_clamp(mean, params),
        variance=variance,
        history=history,
        last_obs_round=max(o.time for o in history),
    )


def propagate_unobserved(
    belief: SiteBelief, dt: int, params: BeliefParams
) -> SiteBelief:
    """Extrapolate a belief dt rounds without a new reading."""
    if dt < 0:
        raise ContractError(f"dt must be non-negative, got {dt}")
    if dt == 0:
        return belief
    variance = min((1.0 + params.inflation * dt) * belief.variance,
                   params.var_cap)
    mean = _clamp(belief.mean + belief.gradient * dt, params)
    return replace(belief, mean=mean, variance=variance)


def update_gradient(
    belief: SiteBelief,
    y_new: float,
    y_prev: float,
    dt: int,
    params: BeliefParams,
) -> SiteBelief:
    """Exponentially smoothed hazard-per-round trend."""
    if dt < 1:
        raise ContractError(f"dt must be at least 1, got {dt}")
    slope = (y_new - y_prev) / dt
    gradient = params.smoothing * slope + (
        1.0 - params.smoothing
    ) * belief.gradient
    return replace(belief, gradient=gradient)


def refresh_gradient(belief: SiteBelief, params: BeliefParams) -> SiteBelief:
    """Update the gradient from the two newest readings, if any."""
    if len(belief.history) < 2:
        return belief
    prev, new = belief.history[-2], belief.history[-1]
    dt = new.time - prev.time
    if dt < 1:
        return belief
    return update_gradient(belief, new.value, prev.value, dt, params)


def boost_uncertainty(belief: SiteBelief, params: BeliefParams) -> SiteBelief:
    """Raise variance after a UGV found hazard at a site believed clean."""
    variance = min(belief.variance + params.boost, params.var_cap)
    return replace(belief, variance=variance)


def collapse_confirmed_clean(belief: SiteBelief) -> SiteBelief:
    """Pin a belief to zero once a UGV reports the site fully clean."""
    return replace(
        belief,
        mean=0.0,
        variance=CONFIRMED_CLEAN_VAR,
        gradient=0.0,
        history=(),
    )


def apply_planned_removal(
    belief: SiteBelief, removal: float, params: BeliefParams
) -> SiteBelief:
    """Book a cleaning visit's planned removal against the belief.

    Retained readings are shifted by the same amount so later updates
    describe the post-cleaning level.
    """
    if removal <= 0:
        return belief
    history = tuple(
        replace(o, value=o.value - removal) for o in belief.history
    )
    return replace(
        belief,
        mean=_clamp(belief.mean - removal, params),
        history=history,
    )


def pin_to_truth(belief: SiteBelief, hazard: float) -> SiteBelief:
    """Oracle belief: mean equals the true hazard, no uncertainty."""
    return replace(belief, mean=float(hazard), variance=0.0)
