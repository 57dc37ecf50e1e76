"""
Utility functions for commuting-pairs.

This module contains file serialization and logging helpers.
"""

from .logging_utils import configure_logging, get_logger

__all__ = ["configure_logging", "get_logger"]
