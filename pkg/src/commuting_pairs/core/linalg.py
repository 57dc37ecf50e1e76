"""
Dense complex-Hermitian linear algebra.

This module contains the numerical substrate used by every construction:
validated operator types, a cyclic Jacobi eigensolver, operator and trace
norms, commutators, pinching and rounding of almost-projections.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ConvergenceError, PreconditionError, ValidationError
from ..utils.logging_utils import get_logger
from .settings import current_tolerances

logger = get_logger(__name__)

Blocks = Sequence[Sequence[int]]


def as_square_matrix(data: object, name: str = "matrix") -> np.ndarray:
    """
    Convert ``data`` to a finite square complex128 array.

    Args:
        data: Array-like, :class:`HermitianOperator` or :class:`OrthoProjection`
        name: Argument name used in error messages

    Returns:
        A new complex128 array
    """
    if isinstance(data, (HermitianOperator, OrthoProjection)):
        return np.array(data.matrix, dtype=np.complex128)
    try:
        array = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"cannot convert to a complex matrix: {e}", field=name)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        raise ValidationError("matrix must be square and non-empty", field=name, value=array.shape)
    if not np.all(np.isfinite(array)):
        raise ValidationError("matrix entries must be finite", field=name)
    return array


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Self-adjoint operator on C^M, symmetrized on ingestion."""

    matrix: np.ndarray
    tol: Optional[float] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        array = as_square_matrix(self.matrix, "matrix")
        tol = self.tol if self.tol is not None else current_tolerances().hermitian_tol(len(array))
        asymmetry = float(np.max(np.abs(array - array.conj().T)))
        if asymmetry > tol:
            raise ValidationError(
                "operator is not Hermitian within tolerance",
                field="matrix",
                value=f"{asymmetry:.3e} > {tol:.3e}",
            )
        object.__setattr__(self, "matrix", _readonly((array + array.conj().T) / 2))

    @property
    def dim(self) -> int:
        """Dimension M of the underlying space."""
        return int(self.matrix.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        """Identity operator of dimension ``dim``."""
        return cls(np.eye(dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class OrthoProjection:
    """Orthogonal projection: Hermitian and idempotent within tolerance."""

    matrix: np.ndarray
    tol: Optional[float] = field(default=None, repr=False)
    rank: int = field(init=False)

    def __post_init__(self) -> None:
        operator = HermitianOperator(self.matrix, tol=self.tol)
        array = np.array(operator.matrix)
        tol = self.tol if self.tol is not None else current_tolerances().projection_tol(len(array))
        defect = operator_norm(array @ array - array)
        if defect > tol:
            raise ValidationError(
                "matrix is not an orthogonal projection",
                field="matrix",
                value=f"||P^2 - P|| = {defect:.3e} > {tol:.3e}",
            )
        object.__setattr__(self, "matrix", _readonly(array))
        object.__setattr__(self, "rank", int(round(float(np.trace(array).real))))

    @property
    def dim(self) -> int:
        """Dimension M of the underlying space."""
        return int(self.matrix.shape[0])

    @classmethod
    def from_vectors(cls, vectors: np.ndarray) -> "OrthoProjection":
        """Projection onto the span of orthonormal columns of ``vectors``."""
        vectors = np.asarray(vectors, dtype=np.complex128)
        return cls(vectors @ vectors.conj().T)

    @classmethod
    def zero(cls, dim: int) -> "OrthoProjection":
        """The zero projection of dimension ``dim``."""
        return cls(np.zeros((dim, dim), dtype=np.complex128))


MatrixLike = Union[np.ndarray, HermitianOperator, OrthoProjection, Sequence[Sequence[complex]]]


def _as_array(data: MatrixLike, name: str = "matrix") -> np.ndarray:
    if isinstance(data, (HermitianOperator, OrthoProjection)):
        return data.matrix
    return as_square_matrix(data, name)


@lru_cache(maxsize=64)
def _round_robin(dim: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    """Tournament ordering: each round is a set of disjoint index pairs covering all pairs."""
    players = list(range(dim + (dim % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < dim and b < dim]
        rounds.append(
            (
                np.array([a for a, _ in pairs], dtype=int),
                np.array([b for _, b in pairs], dtype=int),
            )
        )
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _off_diagonal_norm(array: np.ndarray) -> float:
    return float(np.linalg.norm(array - np.diag(np.diag(array))))


def _jacobi(array: np.ndarray, rel_tol: float, cap_per_dim2: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi with round-robin ordering; the disjoint rotations of a round run together."""
    dim = array.shape[0]
    work = array.copy()
    vectors = np.eye(dim, dtype=np.complex128)
    if dim == 1:
        return work.diagonal().real.copy(), vectors

    target = rel_tol * float(np.linalg.norm(work))
    skip = max(1e-300, 1e-3 * target / dim)
    cap = cap_per_dim2 * dim * dim
    rotations = 0
    sweeps = 0

    off = _off_diagonal_norm(work)
    while off > target:
        if rotations >= cap:
            raise ConvergenceError(
                "Jacobi eigensolver did not converge", iterations=rotations, off_diagonal_norm=off
            )
        for p_all, q_all in _round_robin(dim):
            magnitude = np.abs(work[p_all, q_all])
            active = magnitude > skip
            if not np.any(active):
                continue
            p, q, mag = p_all[active], q_all[active], magnitude[active]
            phase = np.conj(work[p, q]) / mag
            tau = (work[q, q].real - work[p, p].real) / (2.0 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            s_phase = s * phase
            c_phase = c * phase

            col_p, col_q = work[:, p].copy(), work[:, q].copy()
            work[:, p] = col_p * c - col_q * s_phase
            work[:, q] = col_p * s + col_q * c_phase
            row_p, row_q = work[p, :].copy(), work[q, :].copy()
            work[p, :] = row_p * c[:, None] - row_q * np.conj(s_phase)[:, None]
            work[q, :] = row_p * s[:, None] + row_q * np.conj(c_phase)[:, None]
            work[p, q] = 0.0
            work[q, p] = 0.0
            work[p, p] = work[p, p].real
            work[q, q] = work[q, q].real

            vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
            vectors[:, p] = vec_p * c - vec_q * s_phase
            vectors[:, q] = vec_p * s + vec_q * c_phase
            rotations += len(p)
        sweeps += 1
        off = _off_diagonal_norm(work)

    logger.debug("Jacobi converged: dim=%d sweeps=%d rotations=%d", dim, sweeps, rotations)
    return work.diagonal().real.copy(), vectors


def hermitian_eig(
    operator: MatrixLike, tol: Optional[float] = None, method: Optional[str] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian operator.

    Args:
        operator: Hermitian operator or array
        tol: Relative off-diagonal stopping tolerance (Jacobi only)
        method: ``"jacobi"`` or ``"lapack"``; defaults to the active tolerances

    Returns:
        Tuple of (eigenvalues sorted descending, unitary matrix of eigenvector columns)
    """
    if not isinstance(operator, HermitianOperator):
        operator = HermitianOperator(operator)
    settings = current_tolerances()
    method = method or settings.eig_method
    array = np.array(operator.matrix)

    if method == "lapack":
        values, vectors = np.linalg.eigh(array)
    elif method == "jacobi":
        values, vectors = _jacobi(
            array, tol if tol is not None else settings.eig_convergence, settings.rotation_cap
        )
    else:
        raise ValidationError("unknown eigensolver", field="method", value=method)

    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def operator_norm(data: MatrixLike) -> float:
    """Largest singular value."""
    array = _as_array(data)
    return float(np.linalg.norm(array, 2))


def trace_norm(data: MatrixLike) -> float:
    """Sum of singular values."""
    array = _as_array(data)
    return float(np.sum(np.linalg.svd(array, compute_uv=False)))


def commutator(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    """
    Commutator AB - BA.

    When both arguments are :class:`HermitianOperator` instances the result
    is made exactly anti-Hermitian.
    """
    left, right = _as_array(a, "a"), _as_array(b, "b")
    if left.shape != right.shape:
        raise ValidationError(
            "commutator of matrices with different dimensions",
            field="b",
            value=f"{left.shape} vs {right.shape}",
        )
    result = left @ right - right @ left
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        result = (result - result.conj().T) / 2
    return result


def block_labels(blocks: Blocks, dim: int) -> np.ndarray:
    """
    Map each basis index to the block that contains it.

    Raises:
        ValidationError: If the blocks overlap or do not cover ``range(dim)``
    """
    labels = np.full(dim, -1, dtype=int)
    for label, block in enumerate(blocks):
        for index in block:
            if not 0 <= int(index) < dim:
                raise ValidationError("block index out of range", field="blocks", value=index)
            if labels[int(index)] != -1:
                raise ValidationError("blocks overlap", field="blocks", value=int(index))
            labels[int(index)] = label
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise ValidationError(
            "blocks do not cover every basis index", field="blocks", value=missing.tolist()
        )
    return labels


def pinch(data: MatrixLike, blocks: Blocks) -> np.ndarray:
    """
    Zero every entry that connects two different blocks.

    Args:
        data: Matrix expressed in the basis that defines the blocks
        blocks: Partition of ``range(M)`` into index sets

    Returns:
        The block-diagonal part of the matrix
    """
    array = _as_array(data)
    labels = block_labels(blocks, array.shape[0])
    mask = labels[:, None] == labels[None, :]
    return np.where(mask, array, 0.0).astype(np.complex128)


def pinch_projections(data: MatrixLike, projections: Sequence[MatrixLike]) -> np.ndarray:
    """Sum of P A P over a family of projections."""
    array = _as_array(data)
    result = np.zeros_like(array)
    for projection in projections:
        p = _as_array(projection, "projection")
        if p.shape != array.shape:
            raise ValidationError("projection dimension mismatch", field="projections")
        result += p @ array @ p
    return result


def conjugate(data: MatrixLike, basis: np.ndarray) -> np.ndarray:
    """Express ``data`` in the orthonormal basis given by the columns of ``basis``."""
    array = _as_array(data)
    return basis.conj().T @ array @ basis


def from_basis(data: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Inverse of :func:`conjugate`."""
    return basis @ data @ basis.conj().T


def round_to_projection(operator: MatrixLike, delta: float) -> OrthoProjection:
    """
    Replace an almost-idempotent Hermitian operator by a projection.

    The result is the spectral projection onto eigenvalues strictly above 1/2.
    Its range lies in the range of the input, and its distance to the input is
    at most twice the idempotency defect.

    Args:
        operator: Hermitian operator P with ||P^2 - P|| < delta
        delta: Admissible defect, strictly below 1/2

    Returns:
        The rounded projection
    """
    if not isinstance(operator, HermitianOperator):
        operator = HermitianOperator(operator)
    if not delta < 0.5:
        raise PreconditionError(
            "rounding requires delta < 1/2",
            operation="round_to_projection",
            values={"delta": delta},
        )
    array = operator.matrix
    defect = operator_norm(array @ array - array)
    if defect >= delta:
        raise PreconditionError(
            "operator is too far from idempotent",
            operation="round_to_projection",
            values={"defect": defect, "delta": delta},
        )
    values, vectors = hermitian_eig(operator)
    kept = vectors[:, values > 0.5]
    return OrthoProjection.from_vectors(kept)


@dataclass(frozen=True)
class RoundingReport:
    """Outcome of a single projection rounding."""

    defect: float
    distance: float
    rank: int
    idempotency_residual: float

    @property
    def within_factor_two(self) -> bool:
        """Whether ||P_hat - P|| <= 2 ||P^2 - P||."""
        return self.distance <= 2 * self.defect + 1e-12

    def within_strict(self, delta: float) -> bool:
        """Whether the stricter ||P_hat - P|| < delta form holds."""
        return self.distance < delta


def rounding_report(operator: MatrixLike, delta: float) -> Tuple[OrthoProjection, RoundingReport]:
    """Round ``operator`` and measure the defect, the distance and the idempotency residual."""
    if not isinstance(operator, HermitianOperator):
        operator = HermitianOperator(operator)
    projection = round_to_projection(operator, delta)
    array = operator.matrix
    p_hat = projection.matrix
    report = RoundingReport(
        defect=operator_norm(array @ array - array),
        distance=operator_norm(p_hat - array),
        rank=projection.rank,
        idempotency_residual=operator_norm(p_hat @ p_hat - p_hat),
    )
    return projection, report


def eigen_residuals(operator: MatrixLike, values: np.ndarray, vectors: np.ndarray) -> List[float]:
    """Return [||A U - U diag(lambda)||, ||U^H U - I||] for an eigendecomposition."""
    array = _as_array(operator)
    dim = array.shape[0]
    return [
        operator_norm(array @ vectors - vectors * values[None, :]),
        operator_norm(vectors.conj().T @ vectors - np.eye(dim)),
    ]
