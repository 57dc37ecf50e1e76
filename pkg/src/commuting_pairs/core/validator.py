"""
Certificate re-checking.

A certificate file is trusted only after every recorded number has been
recomputed from the matrices it refers to.
"""

import math
from typing import List, Tuple

from ..exceptions import ConvergenceError, PreconditionError, ValidationError
from .linalg import MatrixLike
from .models import BinningParams, Certificate
from .settings import current_tolerances

RECOMPUTED_FIELDS = (
    "eps_measured",
    "delta_eps",
    "dX",
    "dOmega",
    "residual",
    "bound_dX",
    "bound_dOmega",
    "scale_factor",
)


def _close(recorded: float, recomputed: float, rel_tol: float, abs_tol: float) -> bool:
    return math.isclose(recorded, recomputed, rel_tol=rel_tol, abs_tol=abs_tol)


def validate_certificate(
    certificate: Certificate,
    omega: MatrixLike,
    x: MatrixLike,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
) -> Tuple[bool, List[str]]:
    """
    Recompute a certificate from its matrices and compare.

    Args:
        certificate: Certificate to check
        omega: State the certificate refers to
        x: Observable the certificate refers to
        rel_tol: Relative tolerance for recomputed numbers
        abs_tol: Absolute tolerance for recomputed numbers

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    from ..constructions.binning import commuting_approximants

    errors: List[str] = []
    frozen = current_tolerances().bound_constant
    if not _close(certificate.C, frozen, rel_tol, abs_tol):
        errors.append(f"C: recorded {certificate.C!r}, frozen constant is {frozen!r}")
    try:
        params = BinningParams(
            eps=certificate.eps,
            delta_exp=certificate.params.delta_exp,
            beta_exp=certificate.params.beta_exp,
            representative=certificate.representative or "minimum",
        )
        recomputed = commuting_approximants(omega, x, params).certificate
    except (ValueError, ValidationError, PreconditionError, ConvergenceError) as e:
        return False, errors + [f"Certificate cannot be recomputed: {e}"]

    for name in RECOMPUTED_FIELDS:
        recorded = getattr(certificate, name)
        if recorded is None:
            continue
        expected = getattr(recomputed, name)
        if not _close(float(recorded), float(expected), rel_tol, abs_tol):
            errors.append(f"{name}: recorded {recorded!r}, recomputed {expected!r}")

    errors.extend(_validate_bounds(certificate))
    dim = len(getattr(omega, "matrix", omega))
    if not certificate.residual_ok(dim):
        allowed = current_tolerances().commutation_tol(dim)
        errors.append(f"residual {certificate.residual:.3e} exceeds {allowed:.3e}")
    return len(errors) == 0, errors


def _validate_bounds(certificate: Certificate) -> List[str]:
    """Check the recorded numbers against the recorded bounds."""
    return [f"Bound violated: {v}" for v in certificate.violations()]
