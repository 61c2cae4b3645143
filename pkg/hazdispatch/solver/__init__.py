"""
Routing solvers
"""

import numpy as np

from ..core.config import SolverConfig
from ..core.vrpp import VrppInstance, VrppSolution
from .exact import DEFAULT_SITE_LIMIT, solve_exact
from .heuristic import DEFAULT_BUDGET, solve_heuristic


def solve(
    instance: VrppInstance,
    rng: np.random.Generator,
    config: SolverConfig,
) -> VrppSolution:
    """Solve with the configured method.

    ``auto`` runs the exact solver when the instance fits its site limit.
    """
    if config.method == "exact" or (
        config.method == "auto"
        and instance.num_sites <= config.exact_site_limit
    ):
        return solve_exact(instance, site_limit=config.exact_site_limit)
    return solve_heuristic(instance, rng, budget=config.budget)


__all__ = [
    "DEFAULT_BUDGET",
    "DEFAULT_SITE_LIMIT",
    "solve",
    "solve_exact",
    "solve_heuristic",
]
