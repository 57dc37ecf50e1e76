"""
Numerical tolerances and their active scope.

Every tolerance used by the library lives in :class:`Tolerances`. Library
functions that take an optional tolerance argument fall back to the
tolerances of the innermost :func:`use_tolerances` block.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Tolerances shared by all constructions."""

    model_config = ConfigDict(frozen=True)

    absolute: Optional[float] = Field(
        None, gt=0, description="Replaces every dimension-scaled default when set"
    )
    hermitian: float = Field(1e-10, gt=0, description="Hermiticity tolerance per dimension")
    projection: float = Field(1e-10, gt=0, description="Idempotency tolerance per dimension")
    commutation: float = Field(
        1e-10, gt=0, description="Exact-commutation residual tolerance per dimension"
    )
    degeneracy: float = Field(
        1e-9, gt=0, description="Eigenvalue grouping tolerance relative to the operator norm"
    )
    eig_convergence: float = Field(
        1e-14, gt=0, description="Jacobi stop: off-diagonal Frobenius mass relative to the total"
    )
    rotation_cap: int = Field(30, gt=0, description="Jacobi rotation cap per M^2")
    eig_method: Literal["jacobi", "lapack"] = Field(
        "jacobi", description="Eigensolver: cyclic Jacobi or numpy's LAPACK eigh"
    )
    bound_constant: float = Field(
        4.0, ge=0, description="Frozen constant C of the trace-norm bound 2*Delta + C*eps^rate"
    )

    def hermitian_tol(self, dim: int) -> float:
        """Hermiticity tolerance for an operator of dimension ``dim``."""
        return self.absolute if self.absolute is not None else self.hermitian * dim

    def projection_tol(self, dim: int) -> float:
        """Idempotency tolerance for a projection of dimension ``dim``."""
        return self.absolute if self.absolute is not None else self.projection * dim

    def commutation_tol(self, dim: int) -> float:
        """Residual allowed for a commutator that vanishes by construction."""
        return self.absolute if self.absolute is not None else self.commutation * dim

    def degeneracy_tol(self, scale: float) -> float:
        """Grouping tolerance for eigenvalues of an operator with norm ``scale``."""
        if self.absolute is not None:
            return self.absolute
        return self.degeneracy * max(scale, 1e-300)


_ACTIVE: ContextVar[Tolerances] = ContextVar("commuting_pairs_tolerances", default=Tolerances())


def current_tolerances() -> Tolerances:
    """Return the tolerances of the innermost active scope."""
    return _ACTIVE.get()


@contextmanager
def use_tolerances(tolerances: Tolerances) -> Iterator[Tolerances]:
    """Activate ``tolerances`` for the duration of a ``with`` block."""
    token = _ACTIVE.set(tolerances)
    try:
        yield tolerances
    finally:
        _ACTIVE.reset(token)
