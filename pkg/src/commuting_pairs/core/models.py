"""
Pydantic models for parameters, instance recipes and certificates.

These are the user-facing and file-facing schemas; the numerical objects
themselves are dataclasses in :mod:`commuting_pairs.core.linalg` and
:mod:`commuting_pairs.core.spectral`.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .settings import current_tolerances

RecipeKind = Literal[
    "perturbed_commuting", "clustered_spectrum", "random_event", "adversarial_gap"
]
RECIPE_KINDS: Tuple[str, ...] = (
    "perturbed_commuting",
    "clustered_spectrum",
    "random_event",
    "adversarial_gap",
)
Representative = Literal["minimum", "mean"]


class BinningParams(BaseModel):
    """Parameters of the gap binning: commutator scale and the two exponents."""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(..., ge=0, description="Commutator scale epsilon")
    delta_exp: float = Field(0.25, description="Heavy-eigenvalue threshold exponent")
    beta_exp: float = Field(0.75, description="Gap threshold exponent")
    representative: Representative = Field(
        "minimum", description="Bin value: smallest member, or the bin mean"
    )

    @model_validator(mode="after")
    def validate_exponents(self) -> "BinningParams":
        """Require 0 < delta < beta < 1 and beta > 2 delta."""
        if not 0 < self.delta_exp < self.beta_exp < 1:
            raise ValueError(
                f"exponents must satisfy 0 < delta_exp < beta_exp < 1 "
                f"(got {self.delta_exp}, {self.beta_exp})"
            )
        if not self.beta_exp > 2 * self.delta_exp:
            raise ValueError(
                f"beta_exp must exceed 2 * delta_exp (got {self.beta_exp} <= {2 * self.delta_exp})"
            )
        return self

    @property
    def heavy_threshold(self) -> float:
        """eps ** delta_exp: eigenvalues below it belong to the tail."""
        return float(self.eps**self.delta_exp)

    @property
    def gap_threshold(self) -> float:
        """eps ** beta_exp: gaps at least this large separate bins."""
        return float(self.eps**self.beta_exp)

    @property
    def dx_rate(self) -> float:
        """Exponent of the observable bound, 1 - beta."""
        return 1.0 - self.beta_exp

    @property
    def domega_rate(self) -> float:
        """Exponent of the state bound, beta - 2 delta."""
        return self.beta_exp - 2.0 * self.delta_exp


class InstanceRecipe(BaseModel):
    """Deterministic description of a generated (state, observable) pair."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=2, description="Dimension M")
    kind: RecipeKind = Field("perturbed_commuting", description="Generator family")
    eps_target: float = Field(..., ge=0, description="Target commutator norm")
    seed: int = Field(0, ge=0, lt=2**64, description="PCG64 seed")
    spectrum_spec: Optional[List[float]] = Field(
        None, description="Explicit eigenvalues of the state (must sum to 1)"
    )

    @field_validator("spectrum_spec")
    @classmethod
    def validate_spectrum(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Reject negative eigenvalues; length and normalization are checked by the generator."""
        if v is not None and any(value < 0 for value in v):
            raise ValueError("spectrum_spec entries must be non-negative")
        return v

    def key(self) -> Tuple[str, int, float, int]:
        """Sort key used to order sweep rows."""
        return (self.kind, self.dim, self.eps_target, self.seed)


class CertificateParams(BaseModel):
    """Exponents recorded in a certificate."""

    delta_exp: float
    beta_exp: float


class Certificate(BaseModel):
    """Certificate of a commuting approximation, in its JSON form."""

    model_config = ConfigDict(extra="allow")

    eps: float = Field(..., ge=0, description="Commutator scale the bounds are stated for")
    delta_eps: float = Field(..., description="Tail weight below eps ** delta_exp")
    dX: float = Field(..., ge=0, description="Operator norm ||X - X'||")
    dOmega: float = Field(..., ge=0, description="Trace norm ||Omega - Omega'||_1")
    residual: float = Field(..., ge=0, description="Operator norm of [Omega', X']")
    bound_dX: float = Field(..., ge=0, description="Certified bound for dX")
    bound_dOmega: float = Field(..., ge=0, description="Bound 2 Delta + C eps^rate for dOmega")
    C: float = Field(..., ge=0, description="Constant of the dOmega bound")
    scale_factor: float = Field(1.0, gt=0, description="max(1, ||X||) used to normalize X")
    params: CertificateParams
    eps_measured: Optional[float] = Field(None, description="||[Omega, X / scale]||")
    row_sum: Optional[float] = Field(None, description="Largest column norm of X - X'")
    row_sum_bound: Optional[float] = Field(None, description="scale * eps^(1 - beta)")
    bins: Optional[int] = Field(None, description="Number of non-zero bins")
    representative: Optional[str] = Field(None, description="Bin representative rule")

    @property
    def pass_dX(self) -> bool:
        """Whether dX <= bound_dX."""
        return self.dX <= self.bound_dX + 1e-12

    @property
    def pass_dOmega(self) -> bool:
        """Whether dOmega <= bound_dOmega."""
        return self.dOmega <= self.bound_dOmega + 1e-12

    def residual_ok(self, dim: int) -> bool:
        """Whether the output pair commutes within the active commutation tolerance."""
        return self.residual <= current_tolerances().commutation_tol(dim)

    def violations(self) -> List[str]:
        """Human-readable list of violated inequalities."""
        violated = []
        if not self.pass_dX:
            violated.append(f"dX = {self.dX:.6g} > bound_dX = {self.bound_dX:.6g}")
        if not self.pass_dOmega:
            violated.append(
                f"dOmega = {self.dOmega:.6g} > bound_dOmega = {self.bound_dOmega:.6g}"
            )
        return violated

    def to_document(self) -> Dict[str, Any]:
        """JSON-ready dictionary."""
        return self.model_dump(exclude_none=True)
