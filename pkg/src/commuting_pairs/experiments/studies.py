"""
Standalone experiments: projection rounding, the rotated-event pipeline and
the finite-dimensional pinching warm-up.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..constructions.events import (
    ChainReport,
    EventPartition,
    assign_index_sets,
    build_measurement_chain,
    truncate_tail,
    verify_chain,
)
from ..constructions.postulate import pinch_observable, pinch_state
from ..core.linalg import HermitianOperator, rounding_report
from ..core.spectral import DensityMatrix, ObservableSpec, born_distribution
from ..exceptions import ConfigurationError, PreconditionError
from ..utils.logging_utils import get_logger
from .generators import make_rng, random_hermitian, random_unitary

logger = get_logger(__name__)

NAN = float("nan")


@dataclass
class RoundingStudy:
    """Counts of projection-rounding outcomes."""

    count: int
    dim: int
    delta: float
    factor_two_violations: int = 0
    strict_violations: int = 0
    max_idempotency_residual: float = 0.0
    max_distance_ratio: float = 0.0
    worst_eigenvalues: List[float] = field(default_factory=list)

    @property
    def idempotent(self) -> bool:
        """Every rounded projection is idempotent to 1e-12 * M."""
        return self.max_idempotency_residual <= 1e-12 * self.dim

    @property
    def passed(self) -> bool:
        return self.factor_two_violations == 0 and self.idempotent

    def summary(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "factor_two_violations": self.factor_two_violations,
            "strict_violations": self.strict_violations,
            "max_idempotency_residual": self.max_idempotency_residual,
            "max_distance_ratio": self.max_distance_ratio,
            "passed": self.passed,
        }


def _defect_eigenvalue(defect: float) -> float:
    """Smallest eta >= 0 with eta (1 - eta) = defect."""
    return (1.0 - math.sqrt(1.0 - 4.0 * defect)) / 2.0


def rounding_study(
    count: int = 1000,
    dim: int = 6,
    seed: int = 0,
    max_defect: float = 0.24,
    delta: float = 0.25,
) -> RoundingStudy:
    """
    Round perturbed projections and count bound outcomes.

    Each operator has eigenvalues within eta of 0 or 1, and one eigenvalue sits
    exactly at distance eta where eta (1 - eta) is drawn uniformly from
    (0, max_defect]. Every rounding is checked against ||P_hat - P|| <= 2
    ||P^2 - P||; outcomes with ||P_hat - P|| >= delta are counted separately.

    Args:
        count: Number of operators
        dim: Dimension
        seed: PCG64 seed
        max_defect: Largest idempotency defect, below 1/4
        delta: Rounding admissibility bound, above max_defect and below 1/2

    Returns:
        Counts and worst-case measurements
    """
    if not 0 < max_defect < 0.25:
        raise ConfigurationError("max_defect must lie in (0, 1/4)", "max_defect", max_defect)
    if not max_defect < delta < 0.5:
        raise ConfigurationError("delta must lie in (max_defect, 1/2)", "delta", delta)

    rng = make_rng(seed)
    study = RoundingStudy(count=count, dim=dim, delta=delta)
    for _ in range(count):
        defect = float(rng.uniform(0.0, max_defect))
        while defect == 0.0:
            defect = float(rng.uniform(0.0, max_defect))
        eta = _defect_eigenvalue(defect)
        near_one = rng.random(dim) < 0.5
        offsets = rng.uniform(0.0, eta, dim)
        offsets[int(rng.integers(dim))] = eta
        values = np.where(near_one, 1.0 - offsets, offsets)
        unitary = random_unitary(rng, dim)
        operator = HermitianOperator((unitary * values[None, :]) @ unitary.conj().T)

        _, report = rounding_report(operator, delta)
        if not report.within_factor_two:
            study.factor_two_violations += 1
            logger.warning("rounding exceeded twice the defect: %s", report)
        if not report.within_strict(delta):
            study.strict_violations += 1
            study.worst_eigenvalues.append(eta)
        study.max_idempotency_residual = max(
            study.max_idempotency_residual, report.idempotency_residual
        )
        study.max_distance_ratio = max(study.max_distance_ratio, report.distance / report.defect)
    return study


@dataclass(frozen=True, eq=False)
class RotatedEventInstance:
    """State, observable and event whose cells are tilted by theta against X."""

    theta: float
    omega: DensityMatrix
    x: HermitianOperator
    event: EventPartition
    observable: ObservableSpec


def rotated_event_instance(theta: float, dim: int = 3) -> RotatedEventInstance:
    """
    Event tilted by ``theta`` against a two-valued observable.

    Per block of three coordinates X = diag(1, 1, -1), and the event cells are
    the standard basis rotated by theta in the plane of the first and third
    coordinate. The state is diagonal in the rotated basis with geometric
    weights, so it is an actuality of the event. At theta = 0 everything
    commutes.

    Args:
        theta: Rotation angle
        dim: Dimension, a multiple of 3

    Returns:
        The instance
    """
    if dim < 3 or dim % 3:
        raise ConfigurationError("dimension must be a positive multiple of 3", "dim", dim)
    x = np.diag(np.tile([1.0, 1.0, -1.0], dim // 3)).astype(np.complex128)
    rotation = np.eye(dim, dtype=np.complex128)
    c, s = math.cos(theta), math.sin(theta)
    for b in range(0, dim, 3):
        rotation[b, b], rotation[b, b + 2] = c, -s
        rotation[b + 2, b], rotation[b + 2, b + 2] = s, c
    weights = 0.7 ** np.arange(dim, dtype=float)
    weights /= weights.sum()
    omega = DensityMatrix((rotation * weights[None, :]) @ rotation.conj().T)
    observable = ObservableSpec.from_operator(x)
    event = EventPartition.from_basis(rotation, [[i] for i in range(dim)])
    return RotatedEventInstance(
        theta=theta, omega=omega, x=HermitianOperator(x), event=event, observable=observable
    )


@dataclass(frozen=True)
class RotatedEventRow:
    """Chain measurements for one angle."""

    theta: float
    n0: int
    report: Optional[ChainReport]
    error: Optional[str] = None

    @property
    def approximation_error(self) -> float:
        return self.report.approximation_error if self.report is not None else NAN


@dataclass
class RotatedEventStudy:
    """Rows of the rotated-event experiment and the fitted theta slope."""

    rows: List[RotatedEventRow]
    eps: float
    exact: Optional[RotatedEventRow] = None

    def slope(self) -> float:
        """Slope of log ||X''' - X|| against log theta over the rows with theta > 0."""
        points = [
            (math.log10(row.theta), math.log10(row.approximation_error))
            for row in self.rows
            if row.theta > 0 and row.approximation_error > 0
        ]
        if len(points) < 2:
            return NAN
        xs, ys = zip(*points)
        slope, _ = np.polyfit(xs, ys, 1)
        return float(slope)

    @property
    def structural_items_pass(self) -> bool:
        """Items (i), (ii) and (iv) hold on every row."""
        return all(
            row.report is not None
            and row.report.item_i
            and row.report.item_ii
            and row.report.item_iv
            for row in self.rows
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "rows": len(self.rows),
            "eps": self.eps,
            "slope": self.slope(),
            "structural_items_pass": self.structural_items_pass,
            "exact_all_pass": (
                self.exact.report.all_pass
                if self.exact is not None and self.exact.report is not None
                else None
            ),
        }


def run_event_pipeline(instance: RotatedEventInstance, eps: float) -> RotatedEventRow:
    """Truncate, assign, build the chain and check it for one instance."""
    try:
        truncated = truncate_tail(instance.omega, instance.event, eps)
        index_sets, _ = assign_index_sets(truncated, instance.observable, eps)
        chain = build_measurement_chain(
            instance.x, truncated, instance.observable, index_sets, eps
        )
        report = verify_chain(instance.omega, chain, truncated, instance.observable, eps)
    except PreconditionError as e:
        logger.warning("event pipeline failed at theta=%.3g: %s", instance.theta, e)
        return RotatedEventRow(theta=instance.theta, n0=0, report=None, error=str(e))
    return RotatedEventRow(theta=instance.theta, n0=truncated.n0, report=report)


def rotated_event_study(
    thetas: Sequence[float] = (1e-1, 1e-2, 1e-3),
    dim: int = 3,
    eps: float = 0.25,
    include_exact: bool = True,
) -> RotatedEventStudy:
    """
    Run the event pipeline on rotated-event instances.

    Args:
        thetas: Rotation angles
        dim: Dimension, a multiple of 3
        eps: Error margin of the pipeline
        include_exact: Also run theta = 0

    Returns:
        One row per angle, plus the exactly commuting row
    """
    rows = [run_event_pipeline(rotated_event_instance(t, dim), eps) for t in thetas]
    exact = run_event_pipeline(rotated_event_instance(0.0, dim), eps) if include_exact else None
    return RotatedEventStudy(rows=rows, eps=eps, exact=exact)


@dataclass
class WarmupStudy:
    """Outcomes of both pinchings on instances with a gapped spectrum."""

    count: int
    gamma_min: float
    observable_violations: int = 0
    state_violations: int = 0
    max_born_discrepancy: float = 0.0
    max_observable_ratio: float = 0.0
    max_state_ratio: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.observable_violations == 0
            and self.state_violations == 0
            and self.max_born_discrepancy <= 1e-12
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "observable_violations": self.observable_violations,
            "state_violations": self.state_violations,
            "max_born_discrepancy": self.max_born_discrepancy,
            "max_observable_ratio": self.max_observable_ratio,
            "max_state_ratio": self.max_state_ratio,
            "passed": self.passed,
        }


def gapped_values(
    rng: np.random.Generator, dim: int, gamma: float, start: float, total: float
) -> np.ndarray:
    """
    Ascending values start + sum of (gamma + e_i) whose sum equals ``total``.

    The slack e_i is Dirichlet distributed and weighted so that consecutive
    values, and the first value and ``start``, are at least gamma apart.
    """
    weights = np.arange(dim, 0, -1, dtype=float)
    slack = total - dim * start - gamma * weights.sum()
    if slack < 0:
        raise ConfigurationError("gap too large for this dimension", "gamma_min", gamma)
    extra = rng.dirichlet(np.ones(dim)) * slack / weights
    return start + np.cumsum(gamma + extra)


def warmup_study(
    count: int = 500,
    dims: Sequence[int] = (2, 3, 4),
    seed: int = 0,
    gamma_min: float = 0.05,
    perturbation: float = 1e-3,
) -> WarmupStudy:
    """
    Pinch random gapped pairs both ways and check the dimension-dependent bounds.

    Args:
        count: Number of instances, spread round-robin over ``dims``
        dims: Dimensions
        seed: PCG64 seed
        gamma_min: Smallest eigenvalue gap of both operators
        perturbation: Size of the non-commuting part relative to gamma_min

    Returns:
        Violation counts, worst ratios and the largest Born discrepancy
    """
    rng = make_rng(seed)
    study = WarmupStudy(count=count, gamma_min=gamma_min)
    for i in range(count):
        dim = dims[i % len(dims)]
        basis = random_unitary(rng, dim)
        omega_values = gapped_values(rng, dim, gamma_min, 0.0, 1.0)
        x_values = gapped_values(rng, dim, gamma_min, -1.0, 0.0)
        x0 = np.diag(rng.permutation(x_values)).astype(np.complex128)
        x0 += perturbation * gamma_min * random_hermitian(rng, dim) / dim
        omega = DensityMatrix((basis * omega_values[None, :]) @ basis.conj().T)
        x = HermitianOperator(basis @ x0 @ basis.conj().T)

        _, observable_cert = pinch_observable(x, omega)
        omega_prime, state_cert = pinch_state(omega, x)
        if not observable_cert.bound_holds:
            study.observable_violations += 1
        if not state_cert.bound_holds:
            study.state_violations += 1
        if observable_cert.claimed_bound > 0:
            study.max_observable_ratio = max(
                study.max_observable_ratio,
                observable_cert.achieved / observable_cert.claimed_bound,
            )
        if state_cert.claimed_bound > 0:
            study.max_state_ratio = max(
                study.max_state_ratio, state_cert.achieved / state_cert.claimed_bound
            )
        spec = ObservableSpec.from_operator(x)
        before = born_distribution(omega, spec)
        after = born_distribution(omega_prime, spec)
        study.max_born_discrepancy = max(
            study.max_born_discrepancy, max(abs(a - b) for a, b in zip(before, after))
        )
    return study
