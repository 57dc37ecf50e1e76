"""
Spectral data model shared by all constructions.

Density matrices, observables with discrete spectra, degeneracy grouping,
tail weights, spectral gaps, Born distributions and interval covers.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ValidationError
from .linalg import (
    HermitianOperator,
    MatrixLike,
    OrthoProjection,
    as_square_matrix,
    hermitian_eig,
    operator_norm,
)
from .settings import current_tolerances

PSD_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix(HermitianOperator):
    """Positive semi-definite Hermitian operator of unit trace."""

    def __post_init__(self) -> None:
        super().__post_init__()
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -PSD_TOLERANCE:
            raise ValidationError(
                "density matrix has a negative eigenvalue", field="matrix", value=lowest
            )
        trace = float(np.trace(self.matrix).real)
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise ValidationError(
                "density matrix must have unit trace", field="matrix", value=trace
            )

    @classmethod
    def from_spectrum(cls, values: Sequence[float], basis: np.ndarray) -> "DensityMatrix":
        """Build U diag(values) U^H from eigenvalues and an orthonormal basis."""
        basis = np.asarray(basis, dtype=np.complex128)
        return cls((basis * np.asarray(values, dtype=float)[None, :]) @ basis.conj().T)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        """The state I / dim."""
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "DensityMatrix":
        """Projection onto a normalized copy of ``vector``."""
        psi = np.asarray(vector, dtype=np.complex128)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Eigenvalues, eigenbasis and degeneracy grouping of a Hermitian operator.

    ``raw_eigenvalues`` and the eigenbasis columns are sorted descending.
    ``groups`` hold column indices of the eigenbasis, one group per distinct
    value; ``kernel_group`` holds the columns of the zero eigenspace when the
    kernel is split off (density matrices).
    """

    raw_eigenvalues: np.ndarray
    eigenbasis: np.ndarray
    distinct_values: Tuple[float, ...]
    groups: Tuple[Tuple[int, ...], ...]
    group_weights: Tuple[float, ...]
    kernel_group: Tuple[int, ...]
    tolerance: float

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return int(self.eigenbasis.shape[0])

    @property
    def kernel_weight(self) -> float:
        """Sum of the raw eigenvalues in the kernel group."""
        if not self.kernel_group:
            return 0.0
        return float(np.sum(self.raw_eigenvalues[list(self.kernel_group)]))

    def blocks(self) -> List[Tuple[int, ...]]:
        """Distinct-value groups followed by the kernel group when it is non-empty."""
        blocks = list(self.groups)
        if self.kernel_group:
            blocks.append(self.kernel_group)
        return blocks

    def projection(self, n: int) -> OrthoProjection:
        """Eigenprojection of the ``n``-th distinct value."""
        return OrthoProjection.from_vectors(self.eigenbasis[:, list(self.groups[n])])

    def projections(self) -> List[OrthoProjection]:
        """All distinct-value eigenprojections, in descending order of value."""
        return [self.projection(n) for n in range(len(self.groups))]

    def kernel_projection(self) -> OrthoProjection:
        """Projection onto the kernel group (the complement of all eigenprojections)."""
        if not self.kernel_group:
            return OrthoProjection.zero(self.dim)
        return OrthoProjection.from_vectors(self.eigenbasis[:, list(self.kernel_group)])

    def reconstruct(self) -> np.ndarray:
        """Sum of distinct value times eigenprojection (the kernel contributes zero)."""
        values = np.zeros(self.dim)
        for value, group in zip(self.distinct_values, self.groups):
            values[list(group)] = value
        return (self.eigenbasis * values[None, :]) @ self.eigenbasis.conj().T


def decompose(
    operator: MatrixLike, tol_degeneracy: Optional[float] = None, split_kernel: bool = True
) -> SpectralDecomposition:
    """
    Group the eigenvalues of a Hermitian operator into distinct values.

    Eigenvalues are chained greedily: a new group opens whenever the gap to the
    previous (larger) eigenvalue exceeds ``tol_degeneracy``.

    Args:
        operator: Hermitian operator
        tol_degeneracy: Grouping tolerance (defaults to 1e-9 times the operator norm)
        split_kernel: Put eigenvalues within tolerance of zero into ``kernel_group``

    Returns:
        The spectral decomposition
    """
    if not isinstance(operator, HermitianOperator):
        operator = HermitianOperator(operator)
    values, basis = hermitian_eig(operator)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if tol_degeneracy is not None:
        tol = tol_degeneracy
    else:
        tol = current_tolerances().degeneracy_tol(scale)

    kernel: List[int] = []
    groups: List[List[int]] = []
    for index, value in enumerate(values):
        if split_kernel and abs(value) <= tol:
            kernel.append(index)
            continue
        if groups and values[groups[-1][-1]] - value <= tol:
            groups[-1].append(index)
        else:
            groups.append([index])

    distinct = tuple(float(np.mean(values[group])) for group in groups)
    weights = tuple(value * len(group) for value, group in zip(distinct, groups))
    return SpectralDecomposition(
        raw_eigenvalues=values,
        eigenbasis=basis,
        distinct_values=distinct,
        groups=tuple(tuple(group) for group in groups),
        group_weights=weights,
        kernel_group=tuple(kernel),
        tolerance=tol,
    )


def tail_weight(decomposition: SpectralDecomposition, eps: float, exponent: float = 0.25) -> float:
    """
    Total weight of the distinct eigenvalues not exceeding ``eps ** exponent``.

    Args:
        decomposition: Decomposition of a density matrix
        eps: Commutator scale
        exponent: Threshold exponent (1/4 by default)

    Returns:
        The tail weight Delta_eps
    """
    if eps < 0:
        raise ValidationError("eps must be non-negative", field="eps", value=eps)
    threshold = eps**exponent
    return float(
        sum(
            weight
            for value, weight in zip(decomposition.distinct_values, decomposition.group_weights)
            if value <= threshold
        )
    )


def min_gap(values: Sequence[float], append_zero: bool = False) -> float:
    """
    Smallest gap between consecutive distinct values.

    Args:
        values: Strictly decreasing values
        append_zero: Treat 0 as an extra trailing value (density-matrix convention)

    Returns:
        The smallest gap, or ``inf`` when there is no pair to compare
    """
    if len(values) == 0:
        raise ValidationError("min_gap needs at least one value", field="values")
    sequence = [float(v) for v in values] + ([0.0] if append_zero else [])
    gaps = [a - b for a, b in zip(sequence, sequence[1:])]
    if any(gap <= 0 for gap in gaps):
        raise ValidationError("values must be strictly decreasing", field="values", value=sequence)
    return min(gaps) if gaps else math.inf


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """Observable with a finite spectrum: values (descending) and eigenprojections."""

    values: Tuple[float, ...]
    projections: Tuple[OrthoProjection, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.projections) or not self.values:
            raise ValidationError("observable needs one projection per value", field="projections")
        if any(a <= b for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("observable values must be strictly decreasing", field="values")
        dim = self.projections[0].dim
        tol = current_tolerances().projection_tol(dim)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for i, projection in enumerate(self.projections):
            if projection.dim != dim:
                raise ValidationError("projection dimension mismatch", field="projections")
            for other in self.projections[i + 1 :]:
                overlap = operator_norm(projection.matrix @ other.matrix)
                if overlap > tol:
                    raise ValidationError(
                        "projections are not pairwise orthogonal",
                        field="projections",
                        value=overlap,
                    )
            total += projection.matrix
        if operator_norm(total - np.eye(dim)) > tol:
            raise ValidationError("projections do not sum to the identity", field="projections")

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return self.projections[0].dim

    def matrix(self) -> np.ndarray:
        """The operator sum_k xi_k Pi_k."""
        return sum(
            (value * p.matrix for value, p in zip(self.values, self.projections)),
            np.zeros((self.dim, self.dim), dtype=np.complex128),
        )

    def operator(self) -> HermitianOperator:
        """The observable as a :class:`HermitianOperator`."""
        return HermitianOperator(self.matrix())

    @classmethod
    def from_operator(
        cls, operator: MatrixLike, tol_degeneracy: Optional[float] = None
    ) -> "ObservableSpec":
        """Spectral decomposition of a Hermitian operator as an observable."""
        decomposition = decompose(operator, tol_degeneracy, split_kernel=False)
        return cls(decomposition.distinct_values, tuple(decomposition.projections()))

    @classmethod
    def from_cover(
        cls, decomposition: SpectralDecomposition, cover: "IntervalCover"
    ) -> "ObservableSpec":
        """Interval midpoints times the spectral projections of the cover intervals."""
        columns: List[List[int]] = [[] for _ in cover.intervals]
        for value, group in zip(decomposition.distinct_values, decomposition.groups):
            columns[cover.index_of(value)].extend(group)
        pairs = [
            (midpoint, OrthoProjection.from_vectors(decomposition.eigenbasis[:, cols]))
            for midpoint, cols in zip(cover.midpoints, columns)
            if cols
        ]
        pairs.sort(key=lambda pair: -pair[0])
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def born_distribution(omega: DensityMatrix, observable: ObservableSpec) -> List[float]:
    """
    Born probabilities tr(Omega Pi_k) for every eigenprojection of the observable.

    Args:
        omega: State
        observable: Observable with projections Pi_k

    Returns:
        One probability per observable value
    """
    if omega.dim != observable.dim:
        raise ValidationError(
            "state and observable dimensions differ",
            field="observable",
            value=f"{omega.dim} vs {observable.dim}",
        )
    return [
        float(np.real(np.trace(omega.matrix @ projection.matrix)))
        for projection in observable.projections
    ]


@dataclass(frozen=True)
class IntervalCover:
    """Closed intervals covering a spectrum, meeting at most in one non-spectral endpoint."""

    intervals: Tuple[Tuple[float, float], ...]
    midpoints: Tuple[float, ...]
    half_width: float

    def __post_init__(self) -> None:
        for lo, hi in self.intervals:
            if hi < lo or hi - lo > 2 * self.half_width * (1 + 1e-12):
                raise ValidationError(
                    "interval longer than twice the half width", field="intervals"
                )
        for (_, hi), (lo, _) in zip(self.intervals, self.intervals[1:]):
            if lo < hi:
                raise ValidationError(
                    "intervals overlap in more than an endpoint", field="intervals"
                )

    def index_of(self, value: float) -> int:
        """Index of the first interval that contains ``value``."""
        for k, (lo, hi) in enumerate(self.intervals):
            if lo <= value <= hi:
                return k
        raise ValidationError("value is not covered", field="value", value=value)


def build_cover(spectrum: Sequence[float], eps: float) -> IntervalCover:
    """
    Greedy left-to-right cover of a finite spectrum by intervals of length at most 2 eps.

    Each interval is centered on the cluster of points it covers. Where two
    neighbouring intervals would overlap, they are cut at a point inside the
    overlap and strictly between their clusters, so a shared endpoint is never
    a spectrum point.

    Args:
        spectrum: Finite list of real points
        eps: Half width of the intervals

    Returns:
        The interval cover with midpoints as representative values
    """
    if eps <= 0:
        raise ValidationError("cover half width must be positive", field="eps", value=eps)
    points = sorted(set(float(x) for x in spectrum))
    if not points:
        raise ValidationError("cannot cover an empty spectrum", field="spectrum")

    clusters: List[Tuple[float, float]] = []
    start = 0
    while start < len(points):
        end = start
        while end + 1 < len(points) and points[end + 1] - points[start] < 2 * eps:
            end += 1
        clusters.append((points[start], points[end]))
        start = end + 1

    intervals = []
    for first, last in clusters:
        center = (first + last) / 2
        intervals.append([center - eps, center + eps])
    for k in range(len(intervals) - 1):
        if intervals[k][1] > intervals[k + 1][0]:
            # inside the overlap and strictly between the two clusters
            lo = max(intervals[k + 1][0], clusters[k][1])
            hi = min(intervals[k][1], clusters[k + 1][0])
            boundary = (lo + hi) / 2
            intervals[k][1] = boundary
            intervals[k + 1][0] = boundary

    return IntervalCover(
        intervals=tuple((lo, hi) for lo, hi in intervals),
        midpoints=tuple((lo + hi) / 2 for lo, hi in intervals),
        half_width=eps,
    )


def as_density_matrix(data: MatrixLike) -> DensityMatrix:
    """Coerce array-like input to a validated :class:`DensityMatrix`."""
    if isinstance(data, DensityMatrix):
        return data
    return DensityMatrix(as_square_matrix(data, "omega"))


def as_hermitian(data: MatrixLike) -> HermitianOperator:
    """Coerce array-like input to a validated :class:`HermitianOperator`."""
    if isinstance(data, HermitianOperator):
        return data
    return HermitianOperator(as_square_matrix(data, "x"))
