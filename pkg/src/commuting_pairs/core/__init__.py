"""
Core numerical model.

This module contains the linear-algebra substrate, the spectral data model,
tolerances, parameter and certificate models, and certificate validation.
"""

from .construction import BaseConstruction, ConstructionResult
from .linalg import (
    HermitianOperator,
    OrthoProjection,
    commutator,
    hermitian_eig,
    operator_norm,
    pinch,
    round_to_projection,
    trace_norm,
)
from .models import BinningParams, Certificate, InstanceRecipe
from .settings import Tolerances, current_tolerances, use_tolerances
from .spectral import (
    DensityMatrix,
    IntervalCover,
    ObservableSpec,
    SpectralDecomposition,
    born_distribution,
    build_cover,
    decompose,
    min_gap,
    tail_weight,
)
from .validator import validate_certificate

__all__ = [
    "BaseConstruction",
    "ConstructionResult",
    "HermitianOperator",
    "OrthoProjection",
    "commutator",
    "hermitian_eig",
    "operator_norm",
    "pinch",
    "round_to_projection",
    "trace_norm",
    "BinningParams",
    "Certificate",
    "InstanceRecipe",
    "Tolerances",
    "current_tolerances",
    "use_tolerances",
    "DensityMatrix",
    "IntervalCover",
    "ObservableSpec",
    "SpectralDecomposition",
    "born_distribution",
    "build_cover",
    "decompose",
    "min_gap",
    "tail_weight",
    "validate_certificate",
]
