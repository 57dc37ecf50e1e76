"""
Command-line interface for commuting-pairs.

This module provides the main CLI entry point: instance generation, the
commuting constructions on matrix files, the event pipeline and certificate
verification. Machine-readable results go to stdout; messages go to stderr.
"""

import json
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Dict, NoReturn, Optional, Tuple

import click
from rich.console import Console
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .. import __version__
from ..constructions import (
    EventPartition,
    assign_index_sets,
    available_constructions,
    build_measurement_chain,
    commuting_approximants,
    get_construction,
    truncate_tail,
    verify_chain,
)
from ..core.linalg import HermitianOperator, commutator, operator_norm
from ..core.models import RECIPE_KINDS, BinningParams, InstanceRecipe
from ..core.settings import Tolerances, use_tolerances
from ..core.spectral import DensityMatrix, ObservableSpec
from ..core.validator import validate_certificate
from ..exceptions import (
    ConfigurationError,
    ConvergenceError,
    PreconditionError,
    SerializationError,
    ValidationError,
)
from ..experiments.generators import build_instance
from ..utils.logging_utils import configure_logging
from ..utils.serialization import (
    dumps_certificate,
    read_certificate,
    read_density_matrix,
    read_event,
    read_hermitian,
    write_certificate,
    write_instance,
    write_matrix,
)
from .experiments import calibrate, study, sweep

console = Console(stderr=True)

EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2

CONSTRUCTION_DESCRIPTIONS = {
    "observable": "Pinch X by the eigenprojections of Omega",
    "state": "Pinch Omega by the eigenprojections of X",
    "quantize": "Pinch Omega by an eps-interval cover of the spectrum of X",
    "binning": "Gap binning of the spectrum of Omega (certified bounds)",
}


def _fail(message: str, code: int) -> NoReturn:
    console.print(f"[red]Error: {escape(message)}[/red]")
    raise SystemExit(code)


def _load_pair(omega_path: str, x_path: str) -> Tuple[DensityMatrix, HermitianOperator]:
    """Read a state and an observable of the same dimension, exiting 2 on bad files."""
    try:
        omega = read_density_matrix(omega_path)
        x = read_hermitian(x_path)
    except SerializationError as e:
        _fail(str(e), EXIT_BAD_INPUT)
    if omega.dim != x.dim:
        _fail(f"dimension mismatch: Omega is {omega.dim}, X is {x.dim}", EXIT_BAD_INPUT)
    return omega, x


def _emit(document: Dict[str, Any]) -> None:
    click.echo(json.dumps(document, indent=2))


@click.group(context_settings={"auto_envvar_prefix": "COMMUTING_PAIRS"})
@click.version_option(version=__version__)
@click.option(
    "--tol",
    type=float,
    default=None,
    help="Absolute tolerance replacing every dimension-scaled default",
)
@click.option(
    "--eig-method",
    type=click.Choice(["jacobi", "lapack"]),
    default="jacobi",
    show_default=True,
    help="Eigensolver",
)
@click.option(
    "--constant",
    type=float,
    default=None,
    help="Constant C of the trace-norm bound (default: the frozen constant)",
)
@click.option("--verbose", "-v", is_flag=True, help="Verbose output")
@click.pass_context
def main(
    ctx: click.Context,
    tol: Optional[float],
    eig_method: str,
    constant: Optional[float],
    verbose: bool,
) -> None:
    """
    commuting-pairs - Commuting approximants for almost-commuting state/observable pairs.

    Builds exactly commuting pairs close to a density matrix and an observable
    whose commutator is small, and certifies how far each operator moved.
    """
    configure_logging(verbose)
    try:
        overrides: Dict[str, Any] = {"absolute": tol, "eig_method": eig_method}
        if constant is not None:
            overrides["bound_constant"] = constant
        tolerances = Tolerances(**overrides)
    except ValueError as e:
        _fail(f"invalid tolerance settings: {e}", EXIT_BAD_INPUT)
    ctx.obj = {"verbose": verbose, "tolerances": tolerances}
    ctx.with_resource(use_tolerances(tolerances))


@main.command()
@click.option(
    "--kind",
    type=click.Choice(list(RECIPE_KINDS)),
    default="perturbed_commuting",
    show_default=True,
    help="Generator family",
)
@click.option("--dim", "-m", type=int, required=True, help="Dimension M")
@click.option("--eps", type=float, required=True, help="Target commutator norm")
@click.option("--seed", type=int, default=0, show_default=True, help="PCG64 seed")
@click.option("--spectrum", default=None, help="Explicit state eigenvalues, comma separated")
@click.option(
    "--out",
    "-o",
    type=click.Path(file_okay=False),
    required=True,
    help="Directory for omega.json, x.json (and event.json)",
)
def gen(
    kind: str, dim: int, eps: float, seed: int, spectrum: Optional[str], out: str
) -> None:
    """Generate an instance and write its matrix files."""
    try:
        spectrum_spec = (
            [float(v) for v in spectrum.split(",") if v.strip()] if spectrum else None
        )
        recipe = InstanceRecipe(
            dim=dim, kind=kind, eps_target=eps, seed=seed, spectrum_spec=spectrum_spec
        )
        instance = build_instance(recipe)
    except (ValueError, ConfigurationError, ValidationError) as e:
        _fail(f"infeasible recipe: {e}", EXIT_BAD_INPUT)

    event = list(instance.event.projections) if instance.event is not None else None
    written = write_instance(
        out, instance.omega, instance.x, recipe, instance.eps_measured, event
    )
    console.print(
        f"[green]Wrote {', '.join(str(p) for p in written.values())}[/green] "
        f"(measured eps {instance.eps_measured:.6e})"
    )


@main.command()
@click.option("--omega", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--x", "x_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option(
    "--eps",
    type=float,
    default=None,
    help="Commutator scale (default: measured on X scaled to unit norm)",
)
@click.option("--delta-exp", type=float, default=0.25, show_default=True)
@click.option("--beta-exp", type=float, default=0.75, show_default=True)
@click.option(
    "--representative",
    type=click.Choice(["minimum", "mean"]),
    default="minimum",
    show_default=True,
    help="Bin value",
)
@click.option("--out", "-o", type=click.Path(dir_okay=False), help="Also write the certificate")
@click.option(
    "--out-dir", type=click.Path(file_okay=False), help="Write omega_prime.json and x_prime.json"
)
def approx(
    omega: str,
    x_path: str,
    eps: Optional[float],
    delta_exp: float,
    beta_exp: float,
    representative: str,
    out: Optional[str],
    out_dir: Optional[str],
) -> None:
    """Build certified commuting approximants and print the certificate."""
    state, observable = _load_pair(omega, x_path)
    if eps is None:
        scale = max(1.0, operator_norm(observable))
        eps = operator_norm(commutator(state, observable)) / scale
    try:
        params = BinningParams(
            eps=eps, delta_exp=delta_exp, beta_exp=beta_exp, representative=representative
        )
    except ValueError as e:
        _fail(f"invalid parameters: {e}", EXIT_BAD_INPUT)

    try:
        result = commuting_approximants(state, observable, params)
    except (PreconditionError, ConvergenceError) as e:
        _fail(str(e), EXIT_CHECK_FAILED)

    certificate = result.certificate
    click.echo(dumps_certificate(certificate), nl=False)
    if out:
        write_certificate(certificate, out)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_matrix(result.omega_prime, Path(out_dir) / "omega_prime.json")
        write_matrix(result.x_prime, Path(out_dir) / "x_prime.json")

    failures = certificate.violations()
    if not result.residual_ok:
        failures.append(f"residual {certificate.residual:.3e} exceeds the commutation tolerance")
    if failures:
        for failure in failures:
            console.print(f"[red]Bound violated: {failure}[/red]")
        raise SystemExit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--omega", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--x", "x_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option(
    "--mode",
    type=click.Choice(["observable", "state", "quantize"]),
    default="observable",
    show_default=True,
    help="Which operator to pinch",
)
@click.option("--eps", type=float, default=None, help="Interval half width for quantize")
@click.option(
    "--out-dir", type=click.Path(file_okay=False), help="Write omega_prime.json and x_prime.json"
)
def pinch(
    omega: str, x_path: str, mode: str, eps: Optional[float], out_dir: Optional[str]
) -> None:
    """Run a pinching construction and print its summary."""
    state, observable = _load_pair(omega, x_path)
    try:
        construction = get_construction(mode, eps=eps)
    except ConfigurationError as e:
        _fail(str(e), EXIT_BAD_INPUT)
    try:
        result = construction.construct(state, observable)
    except (PreconditionError, ConvergenceError) as e:
        _fail(str(e), EXIT_CHECK_FAILED)

    document = result.summary()
    if is_dataclass(result.certificate):
        document["certificate"] = asdict(result.certificate)
    _emit(document)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_matrix(result.omega_prime, Path(out_dir) / "omega_prime.json")
        write_matrix(result.x_prime, Path(out_dir) / "x_prime.json")
    if not result.passed:
        console.print(f"[red]Bound violated for {mode} pinching[/red]")
        raise SystemExit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--omega", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--x", "x_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option(
    "--event", "event_path", type=click.Path(exists=True, dir_okay=False), required=True
)
@click.option("--eps", type=float, required=True, help="Error margin in (0, 1)")
@click.option("--delta", type=float, default=0.49, show_default=True, help="Rounding bound")
@click.option("--c1", type=float, default=1.0, show_default=True)
@click.option("--c2", type=float, default=1.0, show_default=True)
@click.option("--c3", type=float, default=1.0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), help="Write the chain operators")
def event(
    omega: str,
    x_path: str,
    event_path: str,
    eps: float,
    delta: float,
    c1: float,
    c2: float,
    c3: float,
    out_dir: Optional[str],
) -> None:
    """Run the event pipeline: truncation, index sets, measurement chain, checks."""
    state, observable = _load_pair(omega, x_path)
    try:
        partition = EventPartition(tuple(read_event(event_path)))
        spec = ObservableSpec.from_operator(observable)
        truncated = truncate_tail(state, partition, eps)
    except (SerializationError, ValidationError) as e:
        _fail(str(e), EXIT_BAD_INPUT)

    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            task = progress.add_task("Assigning index sets...", total=None)
            index_sets, diagnostics = assign_index_sets(truncated, spec, eps, c1, c2)
            progress.update(task, description="Building measurement chain...")
            chain = build_measurement_chain(observable, truncated, spec, index_sets, eps, delta)
            progress.update(task, description="Checking conclusions...")
            report = verify_chain(state, chain, truncated, spec, eps, c3)
    except (PreconditionError, ConvergenceError) as e:
        _fail(str(e), EXIT_CHECK_FAILED)

    _emit(
        {
            "n0": truncated.n0,
            "tail_probability": truncated.tail_probability,
            "index_sets": [list(s) for s in index_sets],
            "index_conditions": {
                "max_comm": diagnostics.max_comm,
                "comm_threshold": diagnostics.comm_threshold,
                "comm_ok": diagnostics.comm_ok,
                "leakage": list(diagnostics.leakage),
                "leakage_ok": diagnostics.leakage_ok,
            },
            "items": {
                "i": report.item_i,
                "ii": report.item_ii,
                "iii": report.item_iii,
                "iv": report.item_iv,
            },
            "report": asdict(report),
        }
    )
    if out_dir:
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        for name in ("x_prime", "x_dprime", "x_tprime", "x_fin"):
            write_matrix(getattr(chain, name), target / f"{name}.json")
    if not report.all_pass:
        for failure in report.failures():
            console.print(f"[red]Check failed: {failure}[/red]")
        raise SystemExit(EXIT_CHECK_FAILED)


@main.command()
@click.option(
    "--certificate",
    "certificate_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
)
@click.option("--omega", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--x", "x_path", type=click.Path(exists=True, dir_okay=False), required=True)
def verify(certificate_path: str, omega: str, x_path: str) -> None:
    """Re-check a certificate file against its matrices."""
    try:
        certificate = read_certificate(certificate_path)
    except SerializationError as e:
        _fail(str(e), EXIT_BAD_INPUT)
    state, observable = _load_pair(omega, x_path)

    is_valid, errors = validate_certificate(certificate, state, observable)
    if not is_valid:
        console.print("[red]Certificate verification failed:[/red]")
        for error in errors:
            console.print(f"  - {escape(error)}")
        raise SystemExit(EXIT_CHECK_FAILED)
    console.print("[green]Certificate verified[/green]")


@main.command()
def constructions() -> None:
    """List the available commuting constructions."""
    table = Table(title="Commuting Constructions")
    table.add_column("Name", style="cyan")
    table.add_column("Description", style="magenta")
    for name in available_constructions():
        table.add_row(name, CONSTRUCTION_DESCRIPTIONS.get(name, ""))
    Console().print(table)


main.add_command(sweep)
main.add_command(calibrate)
main.add_command(study)


if __name__ == "__main__":
    main()
