"""Tests for the commuting constructions."""
