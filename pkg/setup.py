# Minimal setup.py for backwards compatibility
# All configuration is in pyproject.toml
from setuptools import setup

setup()
