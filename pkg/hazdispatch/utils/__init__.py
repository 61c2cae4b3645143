"""
Utility functions and helpers
"""

from .rng import derive_rng, episode_streams

__all__: list[str] = ["derive_rng", "episode_streams"]
