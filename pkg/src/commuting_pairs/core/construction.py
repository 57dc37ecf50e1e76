"""
Base construction framework.

A construction turns an almost-commuting pair (Omega, X) into an exactly
commuting pair and reports how far each operator moved.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict

from .linalg import HermitianOperator
from .spectral import DensityMatrix


@dataclass(frozen=True)
class ConstructionResult:
    """Output pair of a construction plus the distances it moved each operator."""

    name: str
    omega_prime: DensityMatrix
    x_prime: HermitianOperator
    d_x: float
    d_omega: float
    residual: float
    passed: bool
    certificate: Any = None

    def summary(self) -> Dict[str, Any]:
        """Flat dictionary for tables and logs."""
        return {
            "construction": self.name,
            "dX": self.d_x,
            "dOmega": self.d_omega,
            "residual": self.residual,
            "passed": self.passed,
        }


class BaseConstruction(ABC):
    """Abstract base class for all commuting constructions."""

    name: str = "base"

    @abstractmethod
    def construct(self, omega: DensityMatrix, x: HermitianOperator) -> ConstructionResult:
        """Build a commuting pair close to (omega, x)."""
        pass
