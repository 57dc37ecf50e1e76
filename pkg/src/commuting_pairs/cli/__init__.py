"""
Command-line interface for commuting-pairs.

This module provides the CLI tools for generating instances, running the
commuting constructions and the experiment sweeps.
"""

from .main import main

__all__ = [
    "main",
]
