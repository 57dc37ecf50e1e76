"""
Experiment CLI commands.

This module provides the sweep and calibration commands and the ``study``
group for the rounding, rotated-event and warm-up experiments.
"""

import json
import math
import sys
from typing import Any, Dict, List, NoReturn, Optional

import click
from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn
from rich.table import Table

from ..core.models import RECIPE_KINDS, BinningParams, InstanceRecipe
from ..exceptions import ConfigurationError
from ..experiments.generators import recipes_for
from ..experiments.studies import rotated_event_study, rounding_study, warmup_study
from ..experiments.sweep import (
    SweepResult,
    SweepRow,
    build_params_grid,
    calibrate_constant,
    parse_eps_grid,
    parse_float_list,
    parse_int_list,
    run_sweep,
    write_csv,
)

console = Console(stderr=True)

SLOPE_TARGET = 1.0
SLOPE_SLACK = 0.2


def _fail(message: str, code: int) -> NoReturn:
    console.print(f"[red]Error: {escape(message)}[/red]")
    raise SystemExit(code)


def _verbose(ctx: click.Context) -> bool:
    return bool((ctx.find_root().obj or {}).get("verbose", False))


def _recipes(dims: str, eps_grid: str, kinds: str, seed: int, seeds: int) -> List[InstanceRecipe]:
    kind_list = [k.strip() for k in kinds.split(",") if k.strip()]
    unknown = [k for k in kind_list if k not in RECIPE_KINDS]
    if unknown:
        raise ConfigurationError(
            f"unknown kinds {unknown} (choose from {', '.join(RECIPE_KINDS)})", "kinds", kinds
        )
    dim_list = parse_int_list(dims, "dims")
    grid = parse_eps_grid(eps_grid)
    recipes: List[InstanceRecipe] = []
    for offset in range(seeds):
        recipes.extend(recipes_for(dim_list, grid, kind_list, seed + offset))
    return recipes


def _params(deltas: str, betas: str, representative: str) -> List[BinningParams]:
    valid, rejected = build_params_grid(
        parse_float_list(deltas, "deltas"),
        parse_float_list(betas, "betas"),
        representative,  # type: ignore[arg-type]
    )
    for delta, beta, message in rejected:
        console.print(f"[yellow]Rejected exponents delta={delta}, beta={beta}: {message}[/yellow]")
    if not valid:
        _fail("no valid (delta, beta) combination", 2)
    return valid


def _grid_options(func: Any) -> Any:
    """Options shared by ``sweep`` and ``calibrate``."""
    options = [
        click.option("--dims", required=True, help="Dimensions, e.g. 4,8"),
        click.option(
            "--eps-grid", required=True, help="start:stop:logN or a comma-separated list"
        ),
        click.option(
            "--kinds",
            default="perturbed_commuting",
            show_default=True,
            help="Generator families, comma separated",
        ),
        click.option("--seed", type=int, default=0, show_default=True, help="First seed"),
        click.option("--deltas", default="0.25", show_default=True, help="delta exponents"),
        click.option("--betas", default="0.75", show_default=True, help="beta exponents"),
        click.option(
            "--representative",
            type=click.Choice(["minimum", "mean"]),
            default="minimum",
            show_default=True,
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _summary_table(result: SweepResult) -> Table:
    summary = result.summary()
    table = Table(title="Sweep Summary")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="magenta")
    for key, value in summary.items():
        table.add_row(key, f"{value:.4g}" if isinstance(value, float) else str(value))
    return table


@click.command()
@_grid_options
@click.option("--seeds", type=int, default=1, show_default=True, help="Consecutive seeds per cell")
@click.option("--workers", type=int, default=1, show_default=True, help="Worker threads")
@click.option("--timing", is_flag=True, help="Record wall time per row")
@click.option("--out", "-o", type=click.Path(dir_okay=False), help="CSV path (default: stdout)")
@click.pass_context
def sweep(
    ctx: click.Context,
    dims: str,
    eps_grid: str,
    kinds: str,
    seed: int,
    deltas: str,
    betas: str,
    representative: str,
    seeds: int,
    workers: int,
    timing: bool,
    out: Optional[str],
) -> None:
    """Run the gap-binning construction over a grid and write a CSV."""
    try:
        recipes = _recipes(dims, eps_grid, kinds, seed, seeds)
        params = _params(deltas, betas, representative)
    except (ConfigurationError, ValueError) as e:
        _fail(str(e), 2)

    total = len(recipes) * len(params)
    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=console,
        disable=not _verbose(ctx),
    ) as progress:
        task = progress.add_task("Sweeping...", total=total)

        def advance(row: SweepRow) -> None:
            progress.advance(task)

        try:
            result = run_sweep(recipes, params, workers=workers, timing=timing, progress=advance)
        except ConfigurationError as e:
            _fail(str(e), 2)

    if out:
        write_csv(result, out)
        console.print(f"[green]Wrote {len(result.rows)} rows to {out}[/green]")
    else:
        write_csv(result, sys.stdout)
    if _verbose(ctx):
        console.print(_summary_table(result))

    if result.errors or not result.all_pass:
        console.print(
            f"[red]{len(result.errors)} failed rows, "
            f"{sum(1 for r in result.rows if r.error is None and not r.passed)} bound violations"
            "[/red]"
        )
        raise SystemExit(1)


@click.command()
@_grid_options
@click.option("--seeds", type=int, default=5, show_default=True, help="Consecutive seeds per cell")
def calibrate(
    dims: str,
    eps_grid: str,
    kinds: str,
    seed: int,
    deltas: str,
    betas: str,
    representative: str,
    seeds: int,
) -> None:
    """Compute the smallest constant C of the trace-norm bound on a seed set."""
    try:
        recipes = _recipes(dims, eps_grid, kinds, seed, seeds)
        params = _params(deltas, betas, representative)
    except (ConfigurationError, ValueError) as e:
        _fail(str(e), 2)
    constant = calibrate_constant(recipes, params)
    click.echo(json.dumps({"C": constant, "instances": len(recipes) * len(params)}, indent=2))


def _report(summary: Dict[str, Any], passed: bool) -> None:
    click.echo(json.dumps(summary, indent=2))
    if not passed:
        console.print("[red]Study checks failed[/red]")
        raise SystemExit(1)


@click.group()
def study() -> None:
    """Standalone experiments on rounding, rotated events and the pinching warm-up."""
    pass


@study.command()
@click.option("--count", type=int, default=1000, show_default=True)
@click.option("--dim", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-defect", type=float, default=0.24, show_default=True)
@click.option("--delta", type=float, default=0.25, show_default=True)
def rounding(count: int, dim: int, seed: int, max_defect: float, delta: float) -> None:
    """Round perturbed projections and count factor-two and strict-bound outcomes."""
    try:
        result = rounding_study(count, dim, seed, max_defect, delta)
    except ConfigurationError as e:
        _fail(str(e), 2)
    _report(result.summary(), result.passed)


@study.command()
@click.option("--thetas", default="0.1,0.01,0.001", show_default=True)
@click.option("--dim", type=int, default=3, show_default=True, help="Multiple of 3")
@click.option("--eps", type=float, default=0.25, show_default=True)
def rotated(thetas: str, dim: int, eps: float) -> None:
    """Run the event pipeline on rotated events and fit the theta slope."""
    try:
        result = rotated_event_study(parse_float_list(thetas, "thetas"), dim, eps)
    except ConfigurationError as e:
        _fail(str(e), 2)
    summary = result.summary()
    slope = summary["slope"]
    slope_ok = math.isnan(slope) or abs(slope - SLOPE_TARGET) <= SLOPE_SLACK
    exact_ok = summary["exact_all_pass"] is not False
    _report(summary, result.structural_items_pass and slope_ok and exact_ok)


@study.command()
@click.option("--count", type=int, default=500, show_default=True)
@click.option("--dims", default="2,3,4", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gamma-min", type=float, default=0.05, show_default=True)
def warmup(count: int, dims: str, seed: int, gamma_min: float) -> None:
    """Pinch gapped random pairs both ways and check the dimension-dependent bounds."""
    try:
        result = warmup_study(count, parse_int_list(dims, "dims"), seed, gamma_min)
    except ConfigurationError as e:
        _fail(str(e), 2)
    _report(result.summary(), result.passed)
