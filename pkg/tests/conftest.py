"""
Pytest configuration and shared fixtures.

This module contains shared fixtures and configuration for the test suite.
"""

from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import pytest

from commuting_pairs.core.linalg import HermitianOperator
from commuting_pairs.core.spectral import DensityMatrix
from commuting_pairs.experiments.generators import make_rng, random_hermitian
from commuting_pairs.utils.serialization import write_matrix


@pytest.fixture
def oracle_pair() -> Tuple[DensityMatrix, HermitianOperator]:
    """The 2x2 pair with ||[Omega, X]|| = 0.1 used throughout the hand-traced examples."""
    omega = DensityMatrix(np.diag([0.75, 0.25]).astype(complex))
    x = HermitianOperator(np.array([[0.0, 0.2], [0.2, 0.0]], dtype=complex))
    return omega, x


@pytest.fixture
def state_pinch_pair() -> Tuple[DensityMatrix, HermitianOperator]:
    """X = diag(1, -1) against a state with off-diagonal coherence 0.1."""
    omega = DensityMatrix(np.array([[0.5, 0.1], [0.1, 0.5]], dtype=complex))
    x = HermitianOperator(np.diag([1.0, -1.0]).astype(complex))
    return omega, x


@pytest.fixture
def random_hermitian_8() -> np.ndarray:
    """A seeded 8x8 Hermitian matrix."""
    return random_hermitian(make_rng(2024), 8)


@pytest.fixture
def oracle_files(tmp_path: Path, oracle_pair) -> Dict[str, Path]:
    """Matrix files of the 2x2 oracle pair."""
    omega, x = oracle_pair
    paths = {"omega": tmp_path / "omega.json", "x": tmp_path / "x.json"}
    write_matrix(omega, paths["omega"])
    write_matrix(x, paths["x"])
    return paths
