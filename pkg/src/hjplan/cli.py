"""Command line interface: solve, min-horizon, decompose, batch.

Exit codes: 0 on success/convergence, 2 when a solve fails to converge,
1 on any error (bad scenario, solver divergence, unreachable goal).
"""
from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import yaml

from . import obstacles as obstacle_geometry
from . import scenario as scenario_io
from . import solver as hopflax

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def _load(scenario_path, seed, tol, max_iters):
    scn = scenario_io.load_scenario(scenario_path)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if tol is not None:
        overrides["tol"] = tol
    if max_iters is not None:
        overrides["max_iters"] = max_iters
    if overrides:
        scn.solver = replace(scn.solver, **overrides)
    return scn


def _echo_summary(summary, quiet):
    if quiet:
        return
    status = "converged" if summary.converged else "NOT CONVERGED"
    click.echo(
        f"{summary.scenario_id}: {status} in {summary.iterations} iterations "
        f"({summary.wall_time:.2f} s); u = {summary.value:.4f}, "
        f"terminal distance = {summary.terminal_distance:.4f}, "
        f"min clearance = {summary.min_clearance:.3f}"
    )


@click.group()
def main():
    """Trajectory planning for curvature-constrained vehicles."""


@main.command()
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_dir", default=".", type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--quiet", is_flag=True)
def solve(scenario_path, output_dir, seed, tol, max_iters, quiet):
    """Solve one scenario and write trajectory/summary files."""
    try:
        scn = _load(scenario_path, seed, tol, max_iters)
        summary = scenario_io.run(scn, output_dir)
    except (scenario_io.ScenarioError, hopflax.SolverDivergedError,
            hopflax.NotReachableError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    _echo_summary(summary, quiet)
    sys.exit(EXIT_OK if summary.converged else EXIT_NOT_CONVERGED)


@main.command("min-horizon")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--quiet", is_flag=True)
def min_horizon(scenario_path, seed, tol, max_iters, quiet):
    """Report the smallest horizon at which the goal is reached."""
    try:
        scn = _load(scenario_path, seed, tol, max_iters)
        bracket = scn.horizon_bracket
        if bracket is None:
            if scn.horizon == "auto":
                raise scenario_io.ScenarioError(
                    "horizon_bracket: required for horizon search"
                )
            bracket = (scn.solver.delta, float(scn.horizon))
        horizon = hopflax.find_min_horizon(
            scn.model, scn.obstacles, scn.start, scn.goal, scn.solver,
            bracket[0], bracket[1], scn.reach_tol,
            mode=scn.horizon_search_mode,
        )
    except (scenario_io.ScenarioError, hopflax.SolverDivergedError,
            hopflax.NotReachableError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    if quiet:
        click.echo(f"{horizon:.10g}")
    else:
        click.echo(f"minimal horizon: {horizon:.10g}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Scenario file with an obstacles.raster section.")
@click.option("--output", "output_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--quiet", is_flag=True)
def decompose(scenario_path, output_path, quiet):
    """Decompose a raster obstacle region into balls and write them as YAML."""
    try:
        scn = scenario_io.load_scenario(scenario_path)
        if not scn.decomposed_balls:
            raise scenario_io.ScenarioError(
                "obstacles.raster: scenario has no raster region to decompose"
            )
    except scenario_io.ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    data = {
        "schema_version": scenario_io.SCHEMA_VERSION,
        "balls": [scenario_io._ball_to_dict(b) for b in scn.decomposed_balls],
    }
    with open(output_path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
    if not quiet:
        click.echo(f"wrote {len(scn.decomposed_balls)} balls to {output_path}")
    sys.exit(EXIT_OK)


def _run_one(args):
    path, output_dir, seed, tol, max_iters = args
    try:
        scn = _load(path, seed, tol, max_iters)
        summary = scenario_io.run(scn, output_dir)
        return path, summary, None
    except Exception as exc:  # noqa: BLE001 - reported per scenario
        return path, None, str(exc)


@main.command()
@click.option("--scenario", "scenario_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_dir", default=".", type=click.Path(file_okay=False))
@click.option("--workers", type=int, default=1)
@click.option("--seed", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--quiet", is_flag=True)
def batch(scenario_paths, output_dir, workers, seed, tol, max_iters, quiet):
    """Run several scenarios, optionally in parallel worker processes."""
    jobs = [(p, output_dir, seed, tol, max_iters) for p in scenario_paths]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    exit_code = EXIT_OK
    for path, summary, error in results:
        if error is not None:
            click.echo(f"error: {path}: {error}", err=True)
            exit_code = EXIT_ERROR
            continue
        _echo_summary(summary, quiet)
        if not summary.converged and exit_code == EXIT_OK:
            exit_code = EXIT_NOT_CONVERGED
    sys.exit(exit_code)


if __name__ == "__main__":
    main()
