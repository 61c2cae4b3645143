"""hazdispatch core functionality."""
