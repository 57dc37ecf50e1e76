"""
Bound sweeps over generated instances.

A sweep runs :func:`commuting_approximants` on every (recipe, exponents)
combination and records one row per combination. Rows never abort the sweep:
a failing row keeps its error message and NaN measurements.
"""

import contextvars
import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from ..constructions.binning import commuting_approximants
from ..core.linalg import operator_norm
from ..core.models import BinningParams, Certificate, InstanceRecipe, Representative
from ..exceptions import (
    ConfigurationError,
    ConvergenceError,
    PreconditionError,
    ValidationError,
)
from ..utils.logging_utils import get_logger
from .generators import build_instance

logger = get_logger(__name__)

CSV_HEADER = (
    "kind",
    "dim",
    "seed",
    "eps",
    "delta_eps",
    "dX",
    "bound_dX",
    "dOmega",
    "bound_dOmega",
    "residual",
    "pass_dX",
    "pass_dOmega",
    "wall_ms",
)
BOUND_SLACK = 1e-12
NAN = float("nan")

RowErrors = (ConfigurationError, ConvergenceError, PreconditionError, ValidationError, ValueError)


@dataclass(frozen=True)
class SweepRow:
    """Measurements of one (recipe, exponents) combination."""

    kind: str
    dim: int
    seed: int
    eps_target: float
    delta_exp: float
    beta_exp: float
    eps: float = NAN
    eps_measured: float = NAN
    delta_eps: float = NAN
    dX: float = NAN
    bound_dX: float = NAN
    dOmega: float = NAN
    bound_dOmega: float = NAN
    residual: float = NAN
    wall_ms: float = 0.0
    error: Optional[str] = None

    @property
    def pass_dX(self) -> bool:
        """Recomputed from dX and bound_dX."""
        return self.error is None and self.dX <= self.bound_dX + BOUND_SLACK

    @property
    def pass_dOmega(self) -> bool:
        """Recomputed from dOmega and bound_dOmega."""
        return self.error is None and self.dOmega <= self.bound_dOmega + BOUND_SLACK

    @property
    def passed(self) -> bool:
        return self.pass_dX and self.pass_dOmega

    def csv_values(self) -> List[str]:
        """Cells in :data:`CSV_HEADER` order."""
        return [
            self.kind,
            str(self.dim),
            str(self.seed),
            repr(self.eps),
            repr(self.delta_eps),
            repr(self.dX),
            repr(self.bound_dX),
            repr(self.dOmega),
            repr(self.bound_dOmega),
            repr(self.residual),
            "true" if self.pass_dX else "false",
            "true" if self.pass_dOmega else "false",
            repr(self.wall_ms),
        ]


@dataclass
class SweepResult:
    """All rows of a sweep plus the exponent pairs rejected before it ran."""

    rows: List[SweepRow] = field(default_factory=list)
    rejected: List[Tuple[float, float, str]] = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return len(self.rows) == 0

    @property
    def errors(self) -> List[SweepRow]:
        return [row for row in self.rows if row.error is not None]

    @property
    def all_pass(self) -> bool:
        """True when every row passed; a vacuous sweep passes."""
        return all(row.passed for row in self.rows)

    def max_dx_ratio(self) -> float:
        """Largest dX / bound_dX over the rows with a positive bound."""
        ratios = [
            row.dX / row.bound_dX
            for row in self.rows
            if row.error is None and row.bound_dX > 0
        ]
        return max(ratios) if ratios else NAN

    def dx_slope(self) -> float:
        """
        Slope of log10(median dX) against log10(eps).

        Returns NaN when fewer than two eps values have a positive median dX.
        """
        by_eps: Dict[float, List[float]] = {}
        for row in self.rows:
            if row.error is None and row.eps > 0:
                by_eps.setdefault(row.eps_target, []).append(row.dX)
        points = [
            (math.log10(eps), math.log10(float(np.median(values))))
            for eps, values in sorted(by_eps.items())
            if eps > 0 and float(np.median(values)) > 0
        ]
        if len(points) < 2:
            return NAN
        xs, ys = zip(*points)
        slope, _ = np.polyfit(xs, ys, 1)
        return float(slope)

    def summary(self) -> Dict[str, Any]:
        """Aggregates for reports."""
        return {
            "rows": len(self.rows),
            "errors": len(self.errors),
            "rejected_params": len(self.rejected),
            "vacuous": self.vacuous,
            "all_pass": self.all_pass,
            "dx_violations": sum(1 for r in self.rows if r.error is None and not r.pass_dX),
            "domega_violations": sum(
                1 for r in self.rows if r.error is None and not r.pass_dOmega
            ),
            "max_dx_ratio": self.max_dx_ratio(),
            "dx_slope": self.dx_slope(),
        }


def build_params_grid(
    deltas: Sequence[float],
    betas: Sequence[float],
    representative: Representative = "minimum",
) -> Tuple[List[BinningParams], List[Tuple[float, float, str]]]:
    """
    Validate every (delta, beta) combination.

    Returns:
        Tuple of (valid parameter templates with eps = 0, rejected combinations
        with their validation message)
    """
    valid: List[BinningParams] = []
    rejected: List[Tuple[float, float, str]] = []
    for delta in deltas:
        for beta in betas:
            try:
                valid.append(
                    BinningParams(
                        eps=0.0, delta_exp=delta, beta_exp=beta, representative=representative
                    )
                )
            except PydanticValidationError as e:
                message = "; ".join(str(error["msg"]) for error in e.errors())
                logger.info("rejected exponents (%s, %s): %s", delta, beta, message)
                rejected.append((float(delta), float(beta), message))
    return valid, rejected


def _unit_commutator(eps_measured: float, x_norm: float) -> float:
    return eps_measured / max(1.0, x_norm)


def _run_row(
    recipe: InstanceRecipe,
    template: BinningParams,
    constant: Optional[float],
    timing: bool,
) -> Tuple[SweepRow, Optional[Certificate]]:
    base = dict(
        kind=recipe.kind,
        dim=recipe.dim,
        seed=recipe.seed,
        eps_target=recipe.eps_target,
        delta_exp=template.delta_exp,
        beta_exp=template.beta_exp,
    )
    start = time.perf_counter()
    try:
        instance = build_instance(recipe)
        x_norm = operator_norm(instance.x)
        eps = max(recipe.eps_target, _unit_commutator(instance.eps_measured, x_norm))
        params = template.model_copy(update={"eps": eps})
        cert = commuting_approximants(instance.omega, instance.x, params, constant).certificate
    except RowErrors as e:
        logger.warning(
            "sweep row %s dim=%d seed=%d failed: %s", recipe.kind, recipe.dim, recipe.seed, e
        )
        return SweepRow(**base, error=f"{type(e).__name__}: {e}"), None
    wall_ms = (time.perf_counter() - start) * 1000.0 if timing else 0.0
    row = SweepRow(
        **base,
        eps=cert.eps,
        eps_measured=cert.eps_measured if cert.eps_measured is not None else NAN,
        delta_eps=cert.delta_eps,
        dX=cert.dX,
        bound_dX=cert.bound_dX,
        dOmega=cert.dOmega,
        bound_dOmega=cert.bound_dOmega,
        residual=cert.residual,
        wall_ms=wall_ms,
    )
    return row, cert


def run_sweep(
    recipes: Sequence[InstanceRecipe],
    params_grid: Sequence[BinningParams],
    workers: int = 1,
    timing: bool = False,
    constant: Optional[float] = None,
    progress: Optional[Callable[[SweepRow], None]] = None,
) -> SweepResult:
    """
    Run the gap-binning construction over a recipe x exponents grid.

    Args:
        recipes: Instances to generate
        params_grid: Validated exponent templates (see :func:`build_params_grid`)
        workers: Worker threads; rows come back in grid order regardless
        timing: Record wall time per row (otherwise 0, for byte-identical output)
        constant: Constant C of the dOmega bound (defaults to the active tolerances)
        progress: Called once per finished row

    Returns:
        One row per (recipe, exponents) combination, recipe-major
    """
    if workers < 1:
        raise ConfigurationError("workers must be at least 1", setting="workers", value=workers)
    tasks = [(recipe, template) for recipe in recipes for template in params_grid]
    rows: List[Optional[SweepRow]] = [None] * len(tasks)
    logger.debug("sweep: %d rows on %d worker(s)", len(tasks), workers)

    if workers == 1 or len(tasks) <= 1:
        for index, (recipe, template) in enumerate(tasks):
            rows[index], _ = _run_row(recipe, template, constant, timing)
            if progress is not None:
                progress(rows[index])  # type: ignore[arg-type]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(
                    contextvars.copy_context().run, _run_row, recipe, template, constant, timing
                ): index
                for index, (recipe, template) in enumerate(tasks)
            }
            for future, index in futures.items():
                rows[index], _ = future.result()
                if progress is not None:
                    progress(rows[index])  # type: ignore[arg-type]

    return SweepResult(rows=[row for row in rows if row is not None])


def calibrate_constant(
    recipes: Sequence[InstanceRecipe], params_grid: Sequence[BinningParams]
) -> float:
    """
    Smallest C for which dOmega <= 2 Delta_eps + C eps^rate holds on every row.

    Rows that fail to construct are skipped.
    """
    needed = 0.0
    for recipe in recipes:
        for template in params_grid:
            row, cert = _run_row(recipe, template, 0.0, False)
            if cert is None or cert.eps <= 0:
                continue
            rate = template.beta_exp - 2 * template.delta_exp
            excess = (row.dOmega - 2 * row.delta_eps) / cert.eps**rate
            needed = max(needed, excess)
    logger.debug("calibrated constant: %.6g", needed)
    return needed


def write_csv(result: SweepResult, target: Union[str, Path, TextIO]) -> None:
    """Write the sweep rows with :data:`CSV_HEADER`."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as handle:
            _write_rows(result, handle)
    else:
        _write_rows(result, target)


def _write_rows(result: SweepResult, handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow(row.csv_values())


def dumps_csv(result: SweepResult) -> str:
    """CSV text of a sweep."""
    buffer = io.StringIO()
    _write_rows(result, buffer)
    return buffer.getvalue()


def parse_float_list(text: str, setting: str) -> List[float]:
    """Parse ``"0.2,0.25"``."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"not a comma-separated list of numbers: {e}", setting, text)


def parse_int_list(text: str, setting: str) -> List[int]:
    """Parse ``"4,8"``."""
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"not a comma-separated list of integers: {e}", setting, text)


def parse_eps_grid(text: str) -> List[float]:
    """
    Parse an eps grid.

    Accepts ``start:stop:logN`` (N log-spaced points, endpoints included) or a
    comma-separated list.
    """
    if ":" not in text:
        values = parse_float_list(text, "eps_grid")
    else:
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].startswith("log"):
            raise ConfigurationError("expected start:stop:logN", setting="eps_grid", value=text)
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2][3:])
        except ValueError as e:
            raise ConfigurationError(f"bad eps grid: {e}", setting="eps_grid", value=text)
        if start <= 0 or stop <= 0 or count < 1:
            raise ConfigurationError(
                "log grid needs positive endpoints and at least one point",
                setting="eps_grid",
                value=text,
            )
        values = [float(v) for v in np.logspace(math.log10(start), math.log10(stop), count)]
    if not values or any(v < 0 for v in values):
        raise ConfigurationError("eps grid must be non-empty and non-negative", "eps_grid", text)
    return values
