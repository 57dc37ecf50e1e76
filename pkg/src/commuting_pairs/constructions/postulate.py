"""
Finite-dimensional pinching constructions and the measurement-postulate check.

``pinch_observable`` and ``pinch_state`` remove the off-diagonal blocks of one
operator with respect to the eigenprojections of the other and certify the
distance moved against an explicit gap-dependent bound. ``quantize_observable``
replaces an observable by a coarse-grained one built from an interval cover,
and ``check_postulate`` evaluates the amended measurement postulate for a
given pair of states.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..core.construction import BaseConstruction, ConstructionResult
from ..core.linalg import (
    HermitianOperator,
    MatrixLike,
    commutator,
    conjugate,
    from_basis,
    operator_norm,
    pinch,
    pinch_projections,
    trace_norm,
)
from ..core.settings import current_tolerances
from ..core.spectral import (
    DensityMatrix,
    IntervalCover,
    ObservableSpec,
    SpectralDecomposition,
    as_density_matrix,
    as_hermitian,
    born_distribution,
    build_cover,
    decompose,
    min_gap,
)
from ..exceptions import DegenerateGapError, ValidationError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PinchCertificate:
    """Measured commutator, gap and distance of a pinching, with the bound it must obey."""

    eps: float
    gamma: float
    dim: int
    claimed_bound: float
    achieved: float
    residual: float
    blocks: int
    sharp_bound: float

    @property
    def bound_holds(self) -> bool:
        """Whether achieved <= claimed_bound."""
        return self.achieved <= self.claimed_bound + 1e-12

    @property
    def sharp_bound_holds(self) -> bool:
        """Whether achieved <= the block-count form of the bound."""
        return self.achieved <= self.sharp_bound + 1e-12

    @property
    def residual_ok(self) -> bool:
        """Whether the output pair commutes within the exact-commutation tolerance."""
        return self.residual <= current_tolerances().commutation_tol(self.dim)

    @property
    def holds(self) -> bool:
        """Bound and commutation both satisfied."""
        return self.bound_holds and self.residual_ok


@dataclass(frozen=True)
class PostulateReport:
    """Verdict of the amended measurement postulate for (Omega_in, Omega_out, X)."""

    commutator_norm: float
    born_discrepancy: float
    cover_born_discrepancy: float
    block_residual: float
    eps: float
    verdict_amended: bool
    verdict_born: bool


def _check_dims(a: HermitianOperator, b: HermitianOperator) -> None:
    if a.dim != b.dim:
        raise ValidationError(
            "operators have different dimensions", field="x", value=f"{a.dim} vs {b.dim}"
        )


def _reject_degenerate(gamma: float, tol: float, operation: str, which: str) -> None:
    if gamma <= tol:
        raise DegenerateGapError(
            f"spectral gap of {which} is below the degeneracy tolerance; "
            "use commuting_approximants for nearly degenerate spectra",
            operation=operation,
            values={"gamma": gamma, "tolerance": tol},
        )


def _pinch_in_basis(data: MatrixLike, decomposition: SpectralDecomposition) -> np.ndarray:
    basis = decomposition.eigenbasis
    return from_basis(pinch(conjugate(data, basis), decomposition.blocks()), basis)


def pinch_observable(
    x: MatrixLike, omega: MatrixLike
) -> Tuple[HermitianOperator, PinchCertificate]:
    """
    Pinch X by the eigenprojections of Omega, including the kernel projection.

    Args:
        x: Observable
        omega: State

    Returns:
        Tuple of (X', certificate with bound M^2 eps / gamma_Omega)
    """
    x, omega = as_hermitian(x), as_density_matrix(omega)
    _check_dims(omega, x)
    decomposition = decompose(omega)
    gamma = min_gap(decomposition.distinct_values, append_zero=True)
    _reject_degenerate(gamma, x.dim * decomposition.tolerance, "pinch_observable", "the state")

    eps = operator_norm(commutator(omega, x))
    x_prime = HermitianOperator(_pinch_in_basis(x, decomposition))
    blocks = len(decomposition.blocks())
    certificate = PinchCertificate(
        eps=eps,
        gamma=gamma,
        dim=x.dim,
        claimed_bound=x.dim**2 * eps / gamma,
        achieved=operator_norm(x.matrix - x_prime.matrix),
        residual=operator_norm(commutator(omega, x_prime)),
        blocks=blocks,
        sharp_bound=blocks * (blocks - 1) * eps / gamma,
    )
    if not certificate.holds:
        logger.warning("pinch_observable certificate violated: %s", certificate)
    return x_prime, certificate


def pinch_state(omega: MatrixLike, x: MatrixLike) -> Tuple[DensityMatrix, PinchCertificate]:
    """
    Pinch Omega by the eigenprojections of X.

    The Born distribution of X is preserved exactly.

    Args:
        omega: State
        x: Observable

    Returns:
        Tuple of (Omega', certificate with bound M^3 eps / gamma_X)
    """
    omega, x = as_density_matrix(omega), as_hermitian(x)
    _check_dims(omega, x)
    decomposition = decompose(x, split_kernel=False)
    gamma = min_gap(decomposition.distinct_values)
    _reject_degenerate(gamma, omega.dim * decomposition.tolerance, "pinch_state", "the observable")

    eps = operator_norm(commutator(omega, x))
    omega_prime = DensityMatrix(_pinch_in_basis(omega, decomposition))
    blocks = len(decomposition.groups)
    dim = omega.dim
    certificate = PinchCertificate(
        eps=eps,
        gamma=gamma,
        dim=dim,
        claimed_bound=dim**3 * eps / gamma if math.isfinite(gamma) else 0.0,
        achieved=trace_norm(omega.matrix - omega_prime.matrix),
        residual=operator_norm(commutator(omega_prime, x)),
        blocks=blocks,
        sharp_bound=dim * blocks * (blocks - 1) * eps / gamma if math.isfinite(gamma) else 0.0,
    )
    if not certificate.holds:
        logger.warning("pinch_state certificate violated: %s", certificate)
    return omega_prime, certificate


def quantize_observable(x: MatrixLike, eps: float) -> Tuple[ObservableSpec, IntervalCover]:
    """
    Coarse-grain X onto an interval cover of its spectrum.

    Each interval contributes its midpoint times the spectral projection of X
    for the interval, so the result is within eps of X in operator norm.

    Args:
        x: Observable
        eps: Half width of the cover intervals

    Returns:
        Tuple of (quantized observable, interval cover)
    """
    decomposition = decompose(as_hermitian(x), split_kernel=False)
    cover = build_cover(decomposition.distinct_values, eps)
    logger.debug(
        "quantized %d distinct values into %d intervals",
        len(decomposition.distinct_values),
        len(cover.intervals),
    )
    return ObservableSpec.from_cover(decomposition, cover), cover


def check_postulate(
    omega_in: MatrixLike,
    omega_out: MatrixLike,
    x: MatrixLike,
    eps: float,
    born_tol: float = 1e-10,
) -> PostulateReport:
    """
    Evaluate the amended measurement postulate.

    Args:
        omega_in: State before the measurement
        omega_out: State right after the measurement
        x: Measured observable
        eps: Error margin of the instrument
        born_tol: Largest Born discrepancy counted as preserved

    Returns:
        Report with the commutator norm, Born discrepancies and block residual
    """
    omega_in, omega_out, x = (
        as_density_matrix(omega_in),
        as_density_matrix(omega_out),
        as_hermitian(x),
    )
    _check_dims(omega_in, x)
    _check_dims(omega_out, x)

    commutator_norm = operator_norm(commutator(omega_out, x))
    decomposition = decompose(x, split_kernel=False)
    observable = ObservableSpec(
        decomposition.distinct_values, tuple(decomposition.projections())
    )
    born_discrepancy = _max_difference(
        born_distribution(omega_in, observable), born_distribution(omega_out, observable)
    )

    if eps > 0:
        cover = build_cover(decomposition.distinct_values, eps)
        coarse = ObservableSpec.from_cover(decomposition, cover)
    else:
        coarse = observable
    cover_discrepancy = _max_difference(
        born_distribution(omega_in, coarse), born_distribution(omega_out, coarse)
    )
    block_residual = trace_norm(
        omega_out.matrix - pinch_projections(omega_out, coarse.projections)
    )

    return PostulateReport(
        commutator_norm=commutator_norm,
        born_discrepancy=born_discrepancy,
        cover_born_discrepancy=cover_discrepancy,
        block_residual=block_residual,
        eps=eps,
        verdict_amended=commutator_norm < eps,
        verdict_born=born_discrepancy <= born_tol,
    )


def _max_difference(a: List[float], b: List[float]) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if a else 0.0


class ObservablePinching(BaseConstruction):
    """Keep the state, pinch the observable by the state's eigenprojections."""

    name = "observable"

    def construct(self, omega: DensityMatrix, x: HermitianOperator) -> ConstructionResult:
        """Run :func:`pinch_observable`."""
        x_prime, certificate = pinch_observable(x, omega)
        return ConstructionResult(
            name=self.name,
            omega_prime=omega,
            x_prime=x_prime,
            d_x=certificate.achieved,
            d_omega=0.0,
            residual=certificate.residual,
            passed=certificate.holds,
            certificate=certificate,
        )


class StatePinching(BaseConstruction):
    """Keep the observable, pinch the state by the observable's eigenprojections."""

    name = "state"

    def construct(self, omega: DensityMatrix, x: HermitianOperator) -> ConstructionResult:
        """Run :func:`pinch_state`."""
        omega_prime, certificate = pinch_state(omega, x)
        return ConstructionResult(
            name=self.name,
            omega_prime=omega_prime,
            x_prime=x,
            d_x=0.0,
            d_omega=certificate.achieved,
            residual=certificate.residual,
            passed=certificate.holds,
            certificate=certificate,
        )


class IntervalQuantization(BaseConstruction):
    """Quantize the observable on an eps-cover, then pinch the state by the coarse projections."""

    name = "quantize"

    def __init__(self, eps: float) -> None:
        self.eps = eps

    def construct(self, omega: DensityMatrix, x: HermitianOperator) -> ConstructionResult:
        """Quantize X and make Omega block-diagonal for the quantized spectral projections."""
        observable, cover = quantize_observable(x, self.eps)
        x_prime = observable.operator()
        omega_prime = DensityMatrix(pinch_projections(omega, observable.projections))
        d_x = operator_norm(x.matrix - x_prime.matrix)
        residual = operator_norm(commutator(omega_prime, x_prime))
        return ConstructionResult(
            name=self.name,
            omega_prime=omega_prime,
            x_prime=x_prime,
            d_x=d_x,
            d_omega=trace_norm(omega.matrix - omega_prime.matrix),
            residual=residual,
            passed=d_x <= self.eps and residual <= current_tolerances().commutation_tol(x.dim),
            certificate=cover,
        )
