"""
Events, measurement chains and their verification.

An event is a partition of unity by orthogonal projections. Given a state, an
event and an observable, the chain

    X -> X' -> X'' -> X''' -> X_fin

replaces the observable by one that commutes exactly with every cell of the
(truncated) event and whose spectrum lies in the observable's spectrum.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.linalg import (
    HermitianOperator,
    MatrixLike,
    OrthoProjection,
    commutator,
    hermitian_eig,
    operator_norm,
    pinch_projections,
    round_to_projection,
    trace_norm,
)
from ..core.settings import current_tolerances
from ..core.spectral import DensityMatrix, ObservableSpec, as_density_matrix, as_hermitian
from ..exceptions import PreconditionError, RoundingError, ValidationError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

DEFAULT_ROUNDING_DELTA = 0.49


@dataclass(frozen=True, eq=False)
class EventPartition:
    """Pairwise orthogonal projections summing to the identity."""

    projections: Tuple[OrthoProjection, ...]

    def __post_init__(self) -> None:
        if not self.projections:
            raise ValidationError("an event needs at least one projection", field="projections")
        dim = self.projections[0].dim
        tol = current_tolerances().projection_tol(dim)
        errors = []
        total = np.zeros((dim, dim), dtype=np.complex128)
        for n, projection in enumerate(self.projections):
            if projection.dim != dim:
                raise ValidationError("projection dimension mismatch", field="projections")
            for m in range(n + 1, len(self.projections)):
                overlap = operator_norm(projection.matrix @ self.projections[m].matrix)
                if overlap > tol:
                    errors.append(f"cells {n} and {m} overlap ({overlap:.3e})")
            total += projection.matrix
        completeness = operator_norm(total - np.eye(dim))
        if completeness > tol:
            errors.append(f"cells do not sum to the identity ({completeness:.3e})")
        if errors:
            raise ValidationError("invalid event partition", field="projections", errors=errors)

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return self.projections[0].dim

    def __len__(self) -> int:
        return len(self.projections)

    @classmethod
    def from_basis(cls, basis: np.ndarray, cells: Sequence[Sequence[int]]) -> "EventPartition":
        """Event whose cells project onto groups of columns of an orthonormal basis."""
        basis = np.asarray(basis, dtype=np.complex128)
        return cls(tuple(OrthoProjection.from_vectors(basis[:, list(cell)]) for cell in cells))

    @classmethod
    def coordinate(cls, dim: int) -> "EventPartition":
        """The event of the standard basis vectors."""
        return cls.from_basis(np.eye(dim), [[i] for i in range(dim)])


@dataclass(frozen=True, eq=False)
class TruncatedEvent:
    """Event with its light cells merged into a single tail projection."""

    head: Tuple[OrthoProjection, ...]
    tail_projection: OrthoProjection
    n0: int
    tail_probability: float
    weights: Tuple[float, ...]
    permutation: Tuple[int, ...]

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return self.tail_projection.dim

    @property
    def cells(self) -> Tuple[OrthoProjection, ...]:
        """Head cells followed by the tail projection."""
        return self.head + (self.tail_projection,)

    def partition(self) -> EventPartition:
        """The coarsened event {pi_1, ..., pi_(N0-1), tail}."""
        return EventPartition(self.cells)


@dataclass(frozen=True)
class IndexSetDiagnostics:
    """Measured quantities behind the index-set conditions."""

    max_comm: float
    comm_threshold: float
    leakage: Tuple[float, ...]
    leakage_threshold: float
    overlaps: Tuple[Tuple[float, ...], ...]

    @property
    def comm_ok(self) -> bool:
        """Whether every cell almost commutes with every spectral projection."""
        return self.max_comm < self.comm_threshold

    @property
    def leakage_ok(self) -> bool:
        """Whether every spectral projection leaks little into cells assigned elsewhere."""
        return all(value < self.leakage_threshold for value in self.leakage)


@dataclass(frozen=True)
class ChainDiagnostics:
    """Distances and commutators measured along a measurement chain."""

    max_comm: float
    leakage: Tuple[float, ...]
    d1: float
    d2: float
    d3: float
    fin_comms: float
    containment: float
    max_defect: float


@dataclass(frozen=True, eq=False)
class MeasurementChain:
    """The operators X', X'', X''', X_fin and the rounded projections behind them."""

    index_sets: Tuple[Tuple[int, ...], ...]
    x_prime: HermitianOperator
    x_dprime: HermitianOperator
    x_tprime: HermitianOperator
    x_fin: HermitianOperator
    tail_block: np.ndarray
    rounded_projections: Dict[Tuple[int, int], OrthoProjection]
    diagnostics: ChainDiagnostics

    def value_projection(self, k: int) -> np.ndarray:
        """Sum of the rounded projections pi_(k, n) over n in I_k."""
        dim = self.x_fin.dim
        total = np.zeros((dim, dim), dtype=np.complex128)
        for n in self.index_sets[k]:
            total += self.rounded_projections[(k, n)].matrix
        return total


@dataclass(frozen=True)
class ChainReport:
    """Item-by-item verdict on a measurement chain."""

    tail_probability: float
    eps: float
    reduction_residual: float
    approximation_error: float
    approximation_threshold: float
    spectrum_residual: float
    eigenprojection_residual: float
    fin_comms: float
    tolerance: float

    @property
    def item_i(self) -> bool:
        """The tail carries probability at most eps."""
        return self.tail_probability <= self.eps

    @property
    def item_ii(self) -> bool:
        """X''' is reduced by the tail projection."""
        return self.reduction_residual <= self.tolerance

    @property
    def item_iii(self) -> bool:
        """X''' approximates X."""
        return self.approximation_error <= self.approximation_threshold

    @property
    def item_iv(self) -> bool:
        """X_fin has the right spectrum, eigenprojections, and commutes with every cell."""
        return (
            self.spectrum_residual <= self.tolerance
            and self.eigenprojection_residual <= self.tolerance
            and self.fin_comms <= self.tolerance
        )

    @property
    def all_pass(self) -> bool:
        """All four items hold."""
        return self.item_i and self.item_ii and self.item_iii and self.item_iv

    def failures(self) -> List[str]:
        """Which items fail and by how much."""
        failed = []
        if not self.item_i:
            failed.append(f"(i) tail probability {self.tail_probability:.3e} > eps {self.eps:.3e}")
        if not self.item_ii:
            failed.append(
                f"(ii) ||[X''', tail]|| = {self.reduction_residual:.3e} > {self.tolerance:.1e}"
            )
        if not self.item_iii:
            failed.append(
                f"(iii) ||X''' - X|| = {self.approximation_error:.3e} "
                f"> {self.approximation_threshold:.3e}"
            )
        if not self.item_iv:
            failed.append(
                f"(iv) spectrum {self.spectrum_residual:.3e}, "
                f"eigenprojections {self.eigenprojection_residual:.3e}, "
                f"cell commutators {self.fin_comms:.3e} (tolerance {self.tolerance:.1e})"
            )
        return failed


def check_actuality(omega: MatrixLike, event: EventPartition) -> float:
    """
    Trace-norm distance between a state and its pinching by an event.

    Zero means the event is an actuality for the state.

    Args:
        omega: State
        event: Event partition

    Returns:
        ||Omega - sum_n pi_n Omega pi_n||_1
    """
    omega = as_density_matrix(omega)
    if omega.dim != event.dim:
        raise ValidationError(
            "state and event have different dimensions",
            field="event",
            value=f"{omega.dim} vs {event.dim}",
        )
    return trace_norm(omega.matrix - pinch_projections(omega, event.projections))


def _probability(omega: DensityMatrix, projection: OrthoProjection) -> float:
    return float(np.real(np.trace(omega.matrix @ projection.matrix)))


def truncate_tail(omega: MatrixLike, event: EventPartition, eps: float) -> TruncatedEvent:
    """
    Merge the light cells of an event into one tail projection of probability below eps.

    Cells are sorted by decreasing probability first; the head is the shortest
    prefix whose probability exceeds 1 - eps.

    Args:
        omega: State
        event: Event partition
        eps: Tail probability bound, in (0, 1)

    Returns:
        The truncated event
    """
    if not 0 < eps < 1:
        raise ValidationError("eps must lie in (0, 1)", field="eps", value=eps)
    omega = as_density_matrix(omega)
    if omega.dim != event.dim:
        raise ValidationError(
            "state and event have different dimensions",
            field="event",
            value=f"{omega.dim} vs {event.dim}",
        )
    weights = np.array([_probability(omega, p) for p in event.projections])
    order = np.argsort(-weights, kind="stable")
    sorted_weights = weights[order]
    partial = np.cumsum(sorted_weights)
    above = np.flatnonzero(partial > 1 - eps)
    head_size = int(above[0]) + 1 if above.size else len(order)

    head = tuple(event.projections[i] for i in order[:head_size])
    tail_cells = [event.projections[i] for i in order[head_size:]]
    if tail_cells:
        tail = OrthoProjection(sum(p.matrix for p in tail_cells))
    else:
        tail = OrthoProjection.zero(event.dim)
    truncated = TruncatedEvent(
        head=head,
        tail_projection=tail,
        n0=head_size + 1,
        tail_probability=_probability(omega, tail),
        weights=tuple(float(w) for w in sorted_weights),
        permutation=tuple(int(i) for i in order),
    )
    logger.debug(
        "truncated event of %d cells to N0=%d (tail probability %.3e)",
        len(event),
        truncated.n0,
        truncated.tail_probability,
    )
    return truncated


def _max_cell_commutator(cells: Sequence[OrthoProjection], observable: ObservableSpec) -> float:
    return max(
        (
            operator_norm(commutator(cell.matrix, projection.matrix))
            for cell in cells
            for projection in observable.projections
        ),
        default=0.0,
    )


def _leakage(
    head: Sequence[OrthoProjection],
    observable: ObservableSpec,
    index_sets: Sequence[Sequence[int]],
) -> Tuple[float, ...]:
    leakage = []
    for k, projection in enumerate(observable.projections):
        inside = set(index_sets[k])
        leakage.append(
            float(
                sum(
                    operator_norm(cell.matrix @ projection.matrix @ cell.matrix)
                    for n, cell in enumerate(head)
                    if n not in inside
                )
            )
        )
    return tuple(leakage)


def _check_same_space(event: TruncatedEvent, observable: ObservableSpec) -> None:
    if event.dim != observable.dim:
        raise ValidationError(
            "event and observable have different dimensions",
            field="observable",
            value=f"{event.dim} vs {observable.dim}",
        )


def assign_index_sets(
    event: TruncatedEvent,
    observable: ObservableSpec,
    eps: float,
    c1: float = 1.0,
    c2: float = 1.0,
    exponent: float = 2.0,
) -> Tuple[List[Tuple[int, ...]], IndexSetDiagnostics]:
    """
    Assign every head cell to the spectral projection it overlaps most.

    Cell n goes to the k maximizing tr(pi_n Pi_k pi_n) / tr(pi_n); ties go to
    the smaller k. Both index-set conditions are measured, not enforced.

    Args:
        event: Truncated event
        observable: Observable with values xi_k and projections Pi_k
        eps: Error margin
        c1: Constant of the commutator condition
        c2: Constant of the leakage condition
        exponent: Power of N0 in the commutator condition

    Returns:
        Tuple of (index sets I_k of head-cell positions, diagnostics)
    """
    _check_same_space(event, observable)
    overlaps = []
    index_sets: List[List[int]] = [[] for _ in observable.projections]
    for n, cell in enumerate(event.head):
        rank = float(np.trace(cell.matrix).real)
        row = [
            float(np.real(np.trace(cell.matrix @ projection.matrix))) / rank if rank > 0 else 0.0
            for projection in observable.projections
        ]
        overlaps.append(tuple(row))
        index_sets[int(np.argmax(row))].append(n)

    result = [tuple(s) for s in index_sets]
    diagnostics = IndexSetDiagnostics(
        max_comm=_max_cell_commutator(event.cells, observable),
        comm_threshold=c1 * event.n0 ** (-exponent) * eps,
        leakage=_leakage(event.head, observable, result),
        leakage_threshold=c2 * eps,
        overlaps=tuple(overlaps),
    )
    if not (diagnostics.comm_ok and diagnostics.leakage_ok):
        logger.debug(
            "index-set conditions not met: max_comm=%.3e (< %.3e), leakage=%s (< %.3e)",
            diagnostics.max_comm,
            diagnostics.comm_threshold,
            diagnostics.leakage,
            diagnostics.leakage_threshold,
        )
    return result, diagnostics


def build_measurement_chain(
    x: MatrixLike,
    event: TruncatedEvent,
    observable: ObservableSpec,
    index_sets: Sequence[Sequence[int]],
    eps: float,
    delta: float = DEFAULT_ROUNDING_DELTA,
) -> MeasurementChain:
    """
    Build X', X'', X''' and X_fin from an observable, a truncated event and index sets.

    Args:
        x: Observable being measured
        event: Truncated event
        observable: Spectral data of the observable
        index_sets: I_k, head-cell positions per spectral projection
        eps: Error margin (used only for logging)
        delta: Rounding admissibility bound, below 1/2

    Returns:
        The measurement chain

    Raises:
        RoundingError: If some pi_n Pi_k pi_n is too far from idempotent
    """
    x = as_hermitian(x)
    _check_same_space(event, observable)
    if len(index_sets) != len(observable.projections):
        raise ValidationError(
            "need one index set per spectral projection",
            field="index_sets",
            value=f"{len(index_sets)} vs {len(observable.projections)}",
        )
    dim = x.dim
    tail = event.tail_projection.matrix
    tail_block = tail @ x.matrix @ tail
    x_prime = HermitianOperator(pinch_projections(x, event.cells))

    second = np.zeros((dim, dim), dtype=np.complex128)
    third = np.zeros((dim, dim), dtype=np.complex128)
    rounded: Dict[Tuple[int, int], OrthoProjection] = {}
    containment = 0.0
    max_defect = 0.0
    for k, (value, projection) in enumerate(zip(observable.values, observable.projections)):
        for n in index_sets[k]:
            cell = event.head[n].matrix
            compressed = cell @ projection.matrix @ cell
            defect = operator_norm(compressed @ compressed - compressed)
            max_defect = max(max_defect, defect)
            try:
                p_kn = round_to_projection(compressed, delta)
            except PreconditionError as e:
                raise RoundingError(
                    f"cannot round pi_n Pi_k pi_n for (k={k}, n={n})",
                    operation="build_measurement_chain",
                    values={"k": k, "n": n, "defect": defect, "delta": delta},
                ) from e
            rounded[(k, n)] = p_kn
            containment = max(
                containment, operator_norm(cell @ p_kn.matrix @ cell - p_kn.matrix)
            )
            second += value * compressed
            third += value * p_kn.matrix

    x_dprime = HermitianOperator(second + tail_block)
    x_tprime = HermitianOperator(third + tail_block)
    x_fin = HermitianOperator(third)
    diagnostics = ChainDiagnostics(
        max_comm=_max_cell_commutator(event.cells, observable),
        leakage=_leakage(event.head, observable, index_sets),
        d1=operator_norm(x_prime.matrix - x.matrix),
        d2=operator_norm(x_dprime.matrix - x_prime.matrix),
        d3=operator_norm(x_tprime.matrix - x.matrix),
        fin_comms=max(
            operator_norm(commutator(x_fin.matrix, cell.matrix)) for cell in event.cells
        ),
        containment=containment,
        max_defect=max_defect,
    )
    logger.debug("measurement chain at eps=%.3e: %s", eps, diagnostics)
    return MeasurementChain(
        index_sets=tuple(tuple(s) for s in index_sets),
        x_prime=x_prime,
        x_dprime=x_dprime,
        x_tprime=x_tprime,
        x_fin=x_fin,
        tail_block=tail_block,
        rounded_projections=rounded,
        diagnostics=diagnostics,
    )


def verify_chain(
    omega: MatrixLike,
    chain: MeasurementChain,
    event: TruncatedEvent,
    observable: ObservableSpec,
    eps: float,
    c3: float = 1.0,
    tolerance: Optional[float] = None,
) -> ChainReport:
    """
    Check the four conclusions for a measurement chain.

    (i) the tail has probability at most eps; (ii) X''' is reduced by the tail
    projection; (iii) X''' is within c3 * eps of X; (iv) the spectrum of X_fin
    lies in {xi_k} and {0}, the eigenprojection of X_fin for xi_k is the sum of
    the rounded projections of I_k, and X_fin commutes with every cell.

    Args:
        omega: State
        chain: Chain built from these inputs
        event: Truncated event
        observable: Observable spectral data
        eps: Error margin
        c3: Constant of the approximation threshold
        tolerance: Residual tolerance for (ii) and (iv) (defaults to 1e-9)

    Returns:
        Report with the measured residual of every item
    """
    omega = as_density_matrix(omega)
    tol = 1e-9 if tolerance is None else tolerance
    x_fin = chain.x_fin.matrix
    tail = event.tail_projection.matrix

    values, vectors = hermitian_eig(chain.x_fin)
    allowed = np.array(list(observable.values) + [0.0])
    spectrum_residual = float(
        np.max(np.min(np.abs(values[:, None] - allowed[None, :]), axis=1))
    )

    eigenprojection_residual = 0.0
    for k, xi in enumerate(observable.values):
        target = chain.value_projection(k)
        if abs(xi) <= tol:
            residual = operator_norm(x_fin @ target)
        else:
            columns = vectors[:, np.abs(values - xi) <= max(tol, 1e-9 * abs(xi))]
            residual = operator_norm(columns @ columns.conj().T - target)
        eigenprojection_residual = max(eigenprojection_residual, residual)

    report = ChainReport(
        tail_probability=_probability(omega, event.tail_projection),
        eps=eps,
        reduction_residual=operator_norm(commutator(chain.x_tprime.matrix, tail)),
        approximation_error=chain.diagnostics.d3,
        approximation_threshold=c3 * eps,
        spectrum_residual=spectrum_residual,
        eigenprojection_residual=eigenprojection_residual,
        fin_comms=chain.diagnostics.fin_comms,
        tolerance=tol,
    )
    for failure in report.failures():
        logger.debug("measurement chain check failed: %s", failure)
    return report
