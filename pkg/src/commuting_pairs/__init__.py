"""
commuting-pairs.

Commuting approximants for almost-commuting (density matrix, observable)
pairs, with certified distance bounds, event/measurement chains, and a
reproducible experiment harness.
"""

__version__ = "0.1.0"

from .constructions import commuting_approximants, pinch_observable, pinch_state
from .core.linalg import HermitianOperator, OrthoProjection
from .core.models import BinningParams, Certificate, InstanceRecipe
from .core.settings import Tolerances, use_tolerances
from .core.spectral import DensityMatrix, ObservableSpec
from .core.validator import validate_certificate
from .exceptions import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGapError,
    PreconditionError,
    RoundingError,
    SerializationError,
    TailTooLargeError,
    ValidationError,
)

__all__ = [
    "HermitianOperator",
    "OrthoProjection",
    "DensityMatrix",
    "ObservableSpec",
    "BinningParams",
    "Certificate",
    "InstanceRecipe",
    "Tolerances",
    "use_tolerances",
    "commuting_approximants",
    "pinch_observable",
    "pinch_state",
    "validate_certificate",
    "ConfigurationError",
    "ConvergenceError",
    "DegenerateGapError",
    "PreconditionError",
    "RoundingError",
    "SerializationError",
    "TailTooLargeError",
    "ValidationError",
]
