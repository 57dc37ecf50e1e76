"""
Test suite for commuting-pairs.

This module contains all tests for the commuting-pairs library.
"""
