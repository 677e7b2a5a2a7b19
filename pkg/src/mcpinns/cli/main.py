"""Main CLI for mcpinns."""

import csv
import logging
import math
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import numpy as np
import typer
from rich.console import Console
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from mcpinns.autodiff import tape
from mcpinns.autodiff.checkpoint import load_checkpoint, save_checkpoint
from mcpinns.cli.artifacts import RunDirectory
from mcpinns.config import ConfigError, RunConfig, load_run_config
from mcpinns.core.rng import RngKey, Stream
from mcpinns.errors import AccuracyError, ContractViolation, DomainError, TrainingError
from mcpinns.logging import setup_logger
from mcpinns.operators.diagnostics import SweepCell, caputo_sweep, laplacian_sweep
from mcpinns.oracle.manufactured import (
    ManufacturedField,
    caputo_exp_decay,
    exp_decay,
    forcing_laplacian,
)
from mcpinns.oracle.quadrature import (
    MAX_ORACLE_DIM,
    QuadSpec,
    quad_caputo_with_error,
    quad_frac_laplacian_with_error,
)
from mcpinns.problems.base import Problem
from mcpinns.problems.families import ParametricDiffusion
from mcpinns.training.metrics import solution_grid
from mcpinns.training.optim import TrainState
from mcpinns.training.trainer import TrainReport, train
from mcpinns.uq.abc import (
    abc_rejection,
    kde_1d,
    kde_grid,
    observed_values,
    stand_in_model,
    surrogate_model,
)

console = Console()
logger = logging.getLogger("mcpinns.cli")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

TRACE_COLUMNS = ["epoch", "total", "equ", "g", "u", "lr"]
SWEEP_COLUMNS = ["m", "r0", "n_estimates", "mean", "stderr", "reference", "z", "evals_per_estimate"]

app = typer.Typer(
    name="mcpinns",
    help="Monte Carlo PINNs for fractional PDEs",
    no_args_is_help=True,
)


def _load(
    config: Path | None,
    env: str | None,
    seed: int | None,
    workers: int | None,
    out: Path | None,
) -> RunConfig:
    overrides = {"seed": seed, "workers": workers, "out": str(out) if out else None}
    try:
        run = load_run_config(config, env, overrides)
    except ConfigError as e:
        console.print(f"[red]Config error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG) from e
    setup_logger("mcpinns", run.logging.level)
    return run


@contextmanager
def _guarded(run_dir: RunDirectory) -> Iterator[None]:
    """Map library errors to exit codes, writing a failed manifest first."""
    try:
        yield
    except (ConfigError, ContractViolation, DomainError) as e:
        logger.debug("run failed", exc_info=True)
        console.print(f"[red]Error: {e}[/red]")
        run_dir.write_manifest("failed", error=str(e))
        raise typer.Exit(EXIT_CONFIG) from e
    except (TrainingError, AccuracyError) as e:
        logger.debug("run failed", exc_info=True)
        console.print(f"[red]Numerical failure: {e}[/red]")
        run_dir.write_manifest("failed", getattr(e, "diagnostics", None), error=str(e))
        raise typer.Exit(EXIT_NUMERICAL) from e


def _pde_columns(pde_values: dict[str, Any]) -> list[str]:
    columns = []
    for name, value in pde_values.items():
        if isinstance(value, list):
            columns.extend(f"{name}{i}" for i in range(1, len(value) + 1))
        else:
            columns.append(name)
    return columns


def _write_traces(run_dir: RunDirectory, state: TrainState) -> None:
    pde = _pde_columns(state.pde_values())
    run_dir.write_records("loss_trace.csv", state.loss_trace, TRACE_COLUMNS + pde)
    if state.params.trainable_pde:
        run_dir.write_records("parameter_trace.csv", state.pde_trace, ["epoch", *pde])


def _write_grid(run_dir: RunDirectory, problem: Problem, state: TrainState) -> None:
    names, coords, predicted, exact = solution_grid(problem, state.params)
    if exact is None:
        exact_col = [None] * len(predicted)
        err_col = [None] * len(predicted)
    else:
        exact_col = list(exact)
        err_col = list(np.abs(predicted - exact))
    rows = (
        [*c, p, e, a] for c, p, e, a in zip(coords, predicted, exact_col, err_col, strict=True)
    )
    run_dir.write_csv("solution_grid.csv", [*names, "u_nn", "u_exact", "abs_err"], rows)


def _write_training(
    run_dir: RunDirectory, problem: Problem, state: TrainState, report: TrainReport
) -> dict[str, Any]:
    _write_traces(run_dir, state)
    save_checkpoint(run_dir.path("checkpoint.txt"), state.params, problem.network)
    run_dir.track("checkpoint.txt")
    if problem.d <= 3:
        _write_grid(run_dir, problem, state)
    metrics = {**report.to_dict(), "problem": problem.describe()}
    run_dir.write_json("report.json", metrics)
    run_dir.stats.counter.merge(report.counter)
    run_dir.stats.extra["evals_per_point"] = report.evals_per_point
    return metrics


@app.command("train")
def train_command(
    config: Path | None = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: int | None = typer.Option(None, "--seed", help="Root seed (overrides config)"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker threads"),
    checkpoint: Path | None = typer.Option(
        None, "--checkpoint", help="Start from the parameters of this checkpoint"
    ),
    env: str | None = typer.Option(None, "--env", help="Config environment (desk, full)"),
):
    """Train a forward, inverse or parametric surrogate."""
    run = _load(config, env, seed, workers, out)
    run_dir = RunDirectory(Path(run.out), "train", run)
    run_dir.write_config_echo()

    with _guarded(run_dir):
        problem = run.build_problem()
        cfg = run.train_config()
        state = None
        if checkpoint is not None:
            params, _spec = load_checkpoint(checkpoint, problem.network)
            state = TrainState.initial(params, RngKey(run.seed))

        console.print(
            f"[green]Training {problem.family} (d={problem.d}) for {cfg.epochs} epochs "
            f"with {cfg.workers} worker(s)[/green]"
        )
        progress = Progress(
            TextColumn("{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            TextColumn("loss={task.fields[loss]}"),
            TimeElapsedColumn(),
            console=console,
            transient=True,
        )
        with progress:
            task = progress.add_task("Training...", total=cfg.epochs, loss="-")

            def on_epoch(current: TrainState, step: Any) -> None:
                progress.update(task, completed=current.epoch, loss=f"{step.total:.3e}")
                if current.epoch % cfg.log_every == 0:
                    run_dir.stats.sample_memory()

            try:
                state, report = train(problem, cfg, state, on_epoch)
            except TrainingError as e:
                if isinstance(e.last_good, TrainState):
                    _write_traces(run_dir, e.last_good)
                    save_checkpoint(run_dir.path("checkpoint.txt"), e.last_good.params, problem.network)
                    run_dir.track("checkpoint.txt")
                raise

        metrics = _write_training(run_dir, problem, state, report)

    run_dir.write_manifest("ok", metrics)
    console.print(f"[blue]Relative L2: {metrics['relative_l2']}[/blue]")
    if metrics["pde_values"]:
        console.print(f"[blue]Identified: {metrics['pde_values']}[/blue]")
    console.print(f"\n[green]Artifacts written to: {run_dir.root}[/green]")


def _sweep_table(title: str, cells: list[SweepCell]) -> Table:
    table = Table(title=title)
    for column in ("m", "r0", "mean", "stderr", "reference", "z", "evals"):
        table.add_column(column, justify="right")
    for c in cells:
        table.add_row(
            str(c.m),
            f"{c.r0:g}",
            f"{c.mean:.6g}",
            f"{c.stderr:.3g}",
            "-" if c.reference is None else f"{c.reference:.6g}",
            "-" if c.z is None else f"{c.z:.2f}",
            f"{c.evals_per_estimate:g}",
        )
    return table


@app.command("estimate")
def estimate_command(
    config: Path | None = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: int | None = typer.Option(None, "--seed", help="Root seed (overrides config)"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker threads"),
    env: str | None = typer.Option(None, "--env", help="Config environment (desk, full)"),
):
    """Sweep the Monte Carlo estimators over (m, r0) against reference values."""
    run = _load(config, env, seed, workers, out)
    run_dir = RunDirectory(Path(run.out), "estimate", run)
    run_dir.write_config_echo()
    e = run.estimate
    key = RngKey(run.seed).child(Stream.ESTIMATE)

    with _guarded(run_dir):
        with console.status("Running estimator sweep..."):
            if e.field == "exp_t":
                cells = caputo_sweep(e.t, e.gamma, e.m_values, e.n_estimates, key, eps_t=run.estimator.eps_t)
                available = True
                title = f"Caputo estimator, e^(-t) at t={e.t}, gamma={e.gamma}"
            else:
                point = e.point if e.point is not None else (0.0,) * e.d
                cells, available = laplacian_sweep(
                    e.field,
                    point,
                    e.alpha,
                    e.m_values,
                    e.r0_values,
                    e.n_estimates,
                    key,
                    eps=run.estimator.eps,
                    constant=e.constant,
                )
                title = f"Fractional Laplacian estimator, {e.field} field at {list(point)}, alpha={e.alpha}"
        rows = ([getattr(c, name) for name in SWEEP_COLUMNS] for c in cells)
        run_dir.write_csv("estimate.csv", SWEEP_COLUMNS, rows)

    console.print(_sweep_table(title, cells))
    if not available:
        console.print("[yellow]No reference value for this field and dimension: MC statistics only[/yellow]")
    finite_z = [abs(c.z) for c in cells if c.z is not None and math.isfinite(c.z)]
    metrics = {
        "reference_available": available,
        "degraded": not available,
        "max_abs_z": max(finite_z) if finite_z else None,
        "cells": [c.to_dict() for c in cells],
    }
    run_dir.write_manifest("ok", metrics)
    console.print(f"\n[green]Artifacts written to: {run_dir.root}[/green]")


@app.command("abc")
def abc_command(
    config: Path | None = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: int | None = typer.Option(None, "--seed", help="Root seed (overrides config)"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker threads"),
    checkpoint: Path | None = typer.Option(
        None,
        "--checkpoint",
        help="Trained parametric surrogate to use as the forward model; sensor data still "
        "come from [abc] sensor_values or the stand-in family at the true parameters",
    ),
    env: str | None = typer.Option(None, "--env", help="Config environment (desk, full)"),
):
    """Rejection ABC posterior over (alpha, mu) with kernel density estimates."""
    run = _load(config, env, seed, workers, out)
    run_dir = RunDirectory(Path(run.out), "abc", run)
    run_dir.write_config_echo()
    abc_cfg = run.abc_config()

    with _guarded(run_dir):
        if checkpoint is not None or run.abc.source == "checkpoint":
            if checkpoint is None:
                raise ConfigError("[abc] source = 'checkpoint' needs --checkpoint")
            problem = run.build_problem()
            if not isinstance(problem, ParametricDiffusion):
                raise ConfigError("ABC on a checkpoint needs problem.family = 'parametric'")
            params, _spec = load_checkpoint(checkpoint, problem.network)
            model = surrogate_model(problem, params)
            source = str(checkpoint)
        else:
            model = stand_in_model
            source = "stand_in"
        observed = observed_values(abc_cfg, stand_in_model)
        observed_source = "config" if abc_cfg.sensor_values is not None else "stand_in"
        logger.info("forward model: %s; sensor data: %s", source, observed_source)

        with console.status(f"Drawing {abc_cfg.n_draws} prior samples..."):
            posterior = abc_rejection(model, abc_cfg, RngKey(run.seed).child(Stream.ABC), observed)
        run_dir.write_csv(
            "posterior.csv",
            ["alpha", "mu", "discrepancy"],
            zip(posterior.alpha, posterior.mu, posterior.discrepancy, strict=True),
        )
        metrics: dict[str, Any] = {
            "source": source,
            "observed_source": observed_source,
            "n_draws": posterior.n_draws,
            "n_accepted": posterior.n_accepted,
            "acceptance_rate": posterior.acceptance_rate,
            "means": posterior.means(),
            "observed": observed,
        }
        if posterior.n_accepted >= 2:
            for name, samples in (("alpha", posterior.alpha), ("mu", posterior.mu)):
                grid = kde_grid(samples, run.abc.grid_points)
                density = kde_1d(samples, grid)
                run_dir.write_csv(f"density_{name}.csv", [name, "density"], zip(grid, density, strict=True))

    if posterior.n_accepted == 0:
        console.print(f"[red]{posterior.diagnostic}[/red]")
        run_dir.write_manifest("failed", metrics, error=posterior.diagnostic)
        raise typer.Exit(EXIT_NUMERICAL)

    run_dir.write_manifest("ok", metrics)
    console.print(
        f"[blue]Accepted {posterior.n_accepted} of {posterior.n_draws} "
        f"({posterior.acceptance_rate:.4%}); means {posterior.means()}[/blue]"
    )
    console.print(f"\n[green]Artifacts written to: {run_dir.root}[/green]")


def read_points(path: Path) -> list[tuple[float, ...]]:
    """Points from a CSV file, one per row; a non-numeric first row is a header."""
    points: list[tuple[float, ...]] = []
    if not path.is_file():
        raise ConfigError(f"points file not found: {path}")
    with open(path, newline="") as f:
        for number, row in enumerate(csv.reader(f), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = tuple(float(cell) for cell in row)
            except ValueError:
                if number == 1:
                    continue
                raise ConfigError(f"{path}: row {number} is not numeric: {row}") from None
            points.append(values)
    return points


def _check_points(points: list[tuple[float, ...]], width: int, label: str) -> np.ndarray:
    for number, point in enumerate(points, start=1):
        if len(point) != width:
            raise ConfigError(f"{label} row {number} has {len(point)} values, expected {width}")
        if not all(math.isfinite(v) for v in point):
            raise ConfigError(f"{label} row {number} is not finite: {point}")
    return np.asarray(points, dtype=np.float64).reshape(len(points), width)


@app.command("oracle")
def oracle_command(
    config: Path | None = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: int | None = typer.Option(None, "--seed", help="Root seed (overrides config)"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker threads"),
    points: Path | None = typer.Option(None, "--points", help="CSV of evaluation points"),
    env: str | None = typer.Option(None, "--env", help="Config environment (desk, full)"),
):
    """Reference values by adaptive quadrature (d <= 3) or closed form."""
    run = _load(config, env, seed, workers, out)
    run_dir = RunDirectory(Path(run.out), "oracle", run)
    run_dir.write_config_echo()
    o = run.oracle
    spec = QuadSpec(abs_tol=o.abs_tol)

    with _guarded(run_dir):
        if o.target == "caputo":
            times = [(t,) for t in o.times] if points is None else read_points(points)
            t_values = _check_points(times, 1, "time")[:, 0]
            rows = []
            for t in t_values:
                res = quad_caputo_with_error(exp_decay, float(t), o.gamma, spec)
                rows.append([t, res.value, res.error, caputo_exp_decay(float(t), o.gamma)])
            run_dir.write_csv("oracle.csv", ["t", "value", "error", "closed_form"], rows)
        else:
            if o.target == "frac_laplacian" and o.d > MAX_ORACLE_DIM:
                raise ConfigError(f"[oracle] quadrature supports d <= {MAX_ORACLE_DIM}, got d = {o.d}")
            raw_points = list(o.points) if points is None else read_points(points)
            x = _check_points(raw_points, o.d, "point")
            header = [f"x{i}" for i in range(1, o.d + 1)]
            rows = []
            if o.target == "forcing":
                if o.field != "manufactured":
                    raise ConfigError("[oracle] closed-form forcing exists for the manufactured field only")
                for p in x:
                    rows.append([*p, float(forcing_laplacian(p, o.d, o.alpha)), 0.0])
                run_dir.write_csv("oracle.csv", [*header, "value", "error"], rows)
            else:
                field = ManufacturedField(o.alpha, profile="smooth" if o.field == "manufactured" else o.field)
                with console.status(f"Integrating {len(x)} point(s)..."):
                    for p in x:
                        res = quad_frac_laplacian_with_error(
                            lambda q: float(tape.value_of(field(q))), p, o.alpha, spec
                        )
                        closed = (
                            float(forcing_laplacian(p, o.d, o.alpha)) if o.field == "manufactured" else None
                        )
                        rows.append([*p, res.value, res.error, closed])
                run_dir.write_csv("oracle.csv", [*header, "value", "error", "forcing"], rows)

    run_dir.write_manifest("ok", {"target": o.target, "n_points": len(rows)})
    console.print(f"[green]Wrote {len(rows)} reference value(s) to {run_dir.path('oracle.csv')}[/green]")


@app.command()
def version():
    """Show mcpinns version."""
    from mcpinns import __version__

    console.print(f"mcpinns version: {__version__}")


def main():
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
