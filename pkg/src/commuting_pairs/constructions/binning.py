"""
Gap binning: commuting approximants for an almost-commuting pair.

The state's eigenvalues are scanned from the smallest upwards. Eigenvalues
below the first heavy eigenvalue that is separated from its predecessor by a
gap of at least eps^beta form the zero bin; above it a new bin opens at every
gap of at least eps^beta. Flattening every bin to a single value gives a state
whose eigenspaces are the bins, and pinching the observable by the bins gives
an observable that commutes with it exactly.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

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
    trace_norm,
)
from ..core.models import BinningParams, Certificate, CertificateParams
from ..core.settings import current_tolerances
from ..core.spectral import (
    DensityMatrix,
    SpectralDecomposition,
    as_density_matrix,
    as_hermitian,
    decompose,
    tail_weight,
)
from ..exceptions import PreconditionError, TailTooLargeError, ValidationError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

EPS_SLACK = 1e-9


@dataclass(frozen=True)
class Bin:
    """One bin: the interval it spans, its eigenbasis columns and its flattened value."""

    lo: float
    hi: float
    members: Tuple[int, ...]
    representative: float

    @property
    def size(self) -> int:
        """Number of eigenvalues in the bin."""
        return len(self.members)


@dataclass(frozen=True)
class GapBinning:
    """Result of the gap-binning scan of a state's spectrum."""

    bins: Tuple[Bin, ...]
    zero_bin: Bin
    params: BinningParams
    eigenvalues: Tuple[float, ...]
    precursors: Tuple[float, ...]
    heavy_count: int
    heavy_cap: float
    max_bin_width: float
    width_bound: float

    @property
    def bin_count(self) -> int:
        """Number of non-zero bins."""
        return len(self.bins)

    @property
    def bin_sizes(self) -> List[int]:
        """Number of eigenvalues per non-zero bin."""
        return [b.size for b in self.bins]

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return len(self.eigenvalues)

    def blocks(self) -> List[Tuple[int, ...]]:
        """Zero bin (when non-empty) followed by the bins, as eigenbasis column sets."""
        blocks = [self.zero_bin.members] if self.zero_bin.members else []
        return blocks + [b.members for b in self.bins]

    def flattened_values(self) -> np.ndarray:
        """Eigenvalues of the flattened state, aligned with the eigenbasis columns."""
        values = np.zeros(self.dim)
        for b in self.bins:
            values[list(b.members)] = b.representative
        return values


@dataclass(frozen=True)
class CommutingApproximant:
    """Exactly commuting pair (Omega', X') with its certificate."""

    omega_prime: DensityMatrix
    x_prime: HermitianOperator
    certificate: Certificate
    binning: Optional[GapBinning] = None
    flatten_loss: float = 0.0
    flatten_bound: float = 0.0

    @property
    def passed(self) -> bool:
        """Both bounds hold and the output commutes."""
        cert = self.certificate
        return cert.pass_dX and cert.pass_dOmega and self.residual_ok

    @property
    def residual_ok(self) -> bool:
        """Whether ||[Omega', X']|| is within the exact-commutation tolerance."""
        return self.certificate.residual <= current_tolerances().commutation_tol(
            self.omega_prime.dim
        )


def gap_binning(decomposition: SpectralDecomposition, params: BinningParams) -> GapBinning:
    """
    Group the eigenvalues of a state into bins separated by gaps of at least eps^beta.

    Args:
        decomposition: Decomposition of a density matrix
        params: Commutator scale and exponents

    Returns:
        The binning, with bins ordered by increasing representative
    """
    raw = np.clip(decomposition.raw_eigenvalues, 0.0, None)
    ascending = np.argsort(raw, kind="stable")
    values = raw[ascending]
    threshold = params.heavy_threshold
    gap = max(params.gap_threshold, decomposition.tolerance)

    first: Optional[int] = None
    for pos, value in enumerate(values):
        below = values[pos - 1] if pos > 0 else 0.0
        if value >= threshold and value - below >= gap:
            first = pos
            break

    if first is None:
        zero_positions = list(range(len(values)))
        runs: List[List[int]] = []
    else:
        zero_positions = list(range(first))
        runs = [[first]]
        for pos in range(first + 1, len(values)):
            if values[pos] - values[pos - 1] >= gap:
                runs.append([pos])
            else:
                runs[-1].append(pos)

    bins = []
    precursors = []
    for run in runs:
        members = values[run]
        if params.representative == "mean":
            representative = float(np.mean(members))
        else:
            representative = float(members[0])
        bins.append(
            Bin(
                lo=float(members[0]),
                hi=float(members[-1]),
                members=tuple(int(ascending[p]) for p in run),
                representative=representative,
            )
        )
        precursors.append(float(values[run[0] - 1]) if run[0] > 0 else 0.0)

    zero_hi = float(values[zero_positions[-1]]) if zero_positions else 0.0
    zero_bin = Bin(
        lo=0.0,
        hi=zero_hi,
        members=tuple(int(ascending[p]) for p in zero_positions),
        representative=0.0,
    )
    heavy_count = int(np.count_nonzero(values >= threshold))
    binning = GapBinning(
        bins=tuple(bins),
        zero_bin=zero_bin,
        params=params,
        eigenvalues=tuple(float(v) for v in decomposition.raw_eigenvalues),
        precursors=tuple(precursors),
        heavy_count=heavy_count,
        heavy_cap=float(params.eps ** (-params.delta_exp)) if params.eps > 0 else float("inf"),
        max_bin_width=max((b.hi - b.lo for b in bins), default=0.0),
        width_bound=float(params.eps ** (params.beta_exp - params.delta_exp)),
    )
    logger.debug(
        "gap binning: %d bins, sizes %s, zero bin %d",
        binning.bin_count,
        binning.bin_sizes,
        len(zero_bin.members),
    )
    return binning


def _check_binning(decomposition: SpectralDecomposition, binning: GapBinning) -> None:
    if binning.dim != decomposition.dim or not np.allclose(
        binning.eigenvalues, decomposition.raw_eigenvalues, rtol=0.0, atol=1e-15
    ):
        raise ValidationError("binning was not produced from this decomposition", field="binning")


def flatten_state(
    decomposition: SpectralDecomposition, binning: GapBinning
) -> Tuple[HermitianOperator, float]:
    """
    Replace every eigenvalue by its bin representative and the zero-bin eigenvalues by 0.

    Args:
        decomposition: Decomposition of the state
        binning: Binning of that decomposition

    Returns:
        Tuple of (flattened operator, trace-norm distance to the state)
    """
    _check_binning(decomposition, binning)
    flattened = binning.flattened_values()
    basis = decomposition.eigenbasis
    loss = float(np.sum(np.abs(decomposition.raw_eigenvalues - flattened)))
    return HermitianOperator(from_basis(np.diag(flattened).astype(np.complex128), basis)), loss


def block_compress(
    x: MatrixLike, decomposition: SpectralDecomposition, binning: GapBinning
) -> HermitianOperator:
    """
    Keep the matrix elements of X between eigenvectors of the same bin, drop the rest.

    Args:
        x: Observable
        decomposition: Decomposition of the state
        binning: Binning of that decomposition

    Returns:
        The compressed observable X'
    """
    x = as_hermitian(x)
    _check_binning(decomposition, binning)
    if x.dim != decomposition.dim:
        raise ValidationError(
            "observable and state have different dimensions",
            field="x",
            value=f"{x.dim} vs {decomposition.dim}",
        )
    basis = decomposition.eigenbasis
    return HermitianOperator(from_basis(pinch(conjugate(x, basis), binning.blocks()), basis))


def row_sum_norm(difference: MatrixLike, basis: np.ndarray) -> float:
    """max_i (sum_j |<u_j, D u_i>|^2)^(1/2) in the basis ``u``."""
    in_basis = conjugate(difference, basis)
    return float(np.max(np.linalg.norm(in_basis, axis=0)))


def commuting_approximants(
    omega: MatrixLike,
    x: MatrixLike,
    params: BinningParams,
    constant: Optional[float] = None,
) -> CommutingApproximant:
    """
    Build an exactly commuting pair close to an almost-commuting (state, observable) pair.

    Observables with norm above 1 are scaled to unit norm for the construction
    and scaled back afterwards; the dX bound is scaled by the same factor.

    Args:
        omega: State
        x: Observable
        params: Commutator scale eps and exponents
        constant: Constant C of the dOmega bound (defaults to the active tolerances)

    Returns:
        The commuting pair and its certificate

    Raises:
        PreconditionError: If ||[Omega, X / scale]|| exceeds params.eps
        TailTooLargeError: If every eigenvalue lands in the zero bin
    """
    omega, x = as_density_matrix(omega), as_hermitian(x)
    if omega.dim != x.dim:
        raise ValidationError(
            "state and observable have different dimensions",
            field="x",
            value=f"{omega.dim} vs {x.dim}",
        )
    settings = current_tolerances()
    c = settings.bound_constant if constant is None else constant
    dim = omega.dim
    scale = max(1.0, operator_norm(x))
    if scale > 1.0:
        logger.debug("rescaling observable by 1/%.6g", scale)
    x_unit = HermitianOperator(x.matrix / scale)
    eps_measured = operator_norm(commutator(omega, x_unit))
    cert_params = CertificateParams(delta_exp=params.delta_exp, beta_exp=params.beta_exp)

    if params.eps == 0:
        if eps_measured > settings.commutation_tol(dim):
            raise PreconditionError(
                "eps = 0 requires an exactly commuting pair",
                operation="commuting_approximants",
                values={"eps_measured": eps_measured, "eps": 0.0},
            )
        certificate = Certificate(
            eps=0.0,
            delta_eps=0.0,
            dX=0.0,
            dOmega=0.0,
            residual=eps_measured * scale,
            bound_dX=0.0,
            bound_dOmega=0.0,
            C=c,
            scale_factor=scale,
            params=cert_params,
            eps_measured=eps_measured,
            representative=params.representative,
        )
        return CommutingApproximant(omega_prime=omega, x_prime=x, certificate=certificate)

    if eps_measured > params.eps * (1 + EPS_SLACK):
        raise PreconditionError(
            "measured commutator norm exceeds eps",
            operation="commuting_approximants",
            values={"eps_measured": eps_measured, "eps": params.eps},
        )

    decomposition = decompose(omega)
    binning = gap_binning(decomposition, params)
    flattened, loss = flatten_state(decomposition, binning)
    trace = float(np.trace(flattened.matrix).real)
    if trace <= 0:
        raise TailTooLargeError(
            "Delta_eps too large: every eigenvalue fell into the zero bin",
            operation="commuting_approximants",
            values={
                "eps": params.eps,
                "largest_eigenvalue": float(decomposition.raw_eigenvalues[0]),
            },
        )

    omega_prime = DensityMatrix(flattened.matrix / trace)
    x_prime = HermitianOperator(block_compress(x_unit, decomposition, binning).matrix * scale)
    delta_eps = tail_weight(decomposition, params.eps, params.delta_exp)
    dx_bound_unit = params.eps**params.dx_rate

    certificate = Certificate(
        eps=params.eps,
        delta_eps=delta_eps,
        dX=operator_norm(x.matrix - x_prime.matrix),
        dOmega=trace_norm(omega.matrix - omega_prime.matrix),
        residual=operator_norm(commutator(omega_prime, x_prime)),
        bound_dX=scale * dx_bound_unit,
        bound_dOmega=2 * delta_eps + c * params.eps**params.domega_rate,
        C=c,
        scale_factor=scale,
        params=cert_params,
        eps_measured=eps_measured,
        row_sum=row_sum_norm(x.matrix - x_prime.matrix, decomposition.eigenbasis),
        row_sum_bound=scale * dx_bound_unit,
        bins=binning.bin_count,
        representative=params.representative,
    )
    result = CommutingApproximant(
        omega_prime=omega_prime,
        x_prime=x_prime,
        certificate=certificate,
        binning=binning,
        flatten_loss=loss,
        flatten_bound=delta_eps + c * params.eps**params.domega_rate,
    )
    for violation in certificate.violations():
        logger.warning("commuting_approximants bound violated: %s", violation)
    if not result.residual_ok:
        logger.warning("output pair does not commute: residual %.3e", certificate.residual)
    return result


class GapBinningConstruction(BaseConstruction):
    """Gap binning as a registered construction."""

    name = "binning"

    def __init__(self, params: BinningParams, constant: Optional[float] = None) -> None:
        self.params = params
        self.constant = constant

    def construct(self, omega: DensityMatrix, x: HermitianOperator) -> ConstructionResult:
        """Run :func:`commuting_approximants`."""
        result = commuting_approximants(omega, x, self.params, self.constant)
        cert = result.certificate
        return ConstructionResult(
            name=self.name,
            omega_prime=result.omega_prime,
            x_prime=result.x_prime,
            d_x=cert.dX,
            d_omega=cert.dOmega,
            residual=cert.residual,
            passed=result.passed,
            certificate=cert,
        )
