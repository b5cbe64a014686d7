"""Scenario file ingestion, solver orchestration, and result emission.

Scenario files are YAML with a schema_version field.  Trajectory output is
CSV (one row per path node); run summaries are YAML.  See the committed
files under scenarios/ for the format.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import obstacles as obstacle_geometry
from . import solver as hopflax
from . import vehicles

SCHEMA_VERSION = 1

STATE_NAMES = {
    vehicles.CAR: ["x", "y", "theta"],
    vehicles.AIRPLANE: ["x", "y", "z", "theta"],
    vehicles.SUBMARINE: ["x", "y", "z", "theta", "phi"],
}


class ScenarioError(ValueError):
    """Schema violation, reported with the offending field path."""


@dataclass
class Scenario:
    scenario_id: str
    model: vehicles.VehicleModel
    start: np.ndarray
    goal: np.ndarray
    horizon: float | str            # numeric or "auto"
    obstacles: obstacle_geometry.ObstacleSet
    solver: hopflax.SolverConfig
    horizon_bracket: tuple | None = None  # required when horizon == "auto"
    reach_tol: float = 0.05
    horizon_search_mode: str = "bisection"
    decomposed_balls: list = field(default_factory=list)


@dataclass
class RunSummary:
    scenario_id: str
    value: float
    iterations: int
    converged: bool
    wall_time: float
    terminal_distance: float
    min_clearance: float   # min smooth-indicator along the path (1 if free)
    num_steps: int
    delta: float
    seed: int
    horizon: float


def _fail(path, message):
    raise ScenarioError(f"{path}: {message}")


def _get(mapping, key, path, required=True, default=None):
    if key not in mapping:
        if required:
            _fail(f"{path}.{key}" if path else key, "missing required field")
        return default
    return mapping[key]


def _as_floats(value, path, length=None):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        _fail(path, f"expected a numeric list, got {value!r}")
    if arr.ndim != 1:
        _fail(path, "expected a flat numeric list")
    if length is not None and arr.shape[0] != length:
        _fail(path, f"expected {length} components, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        _fail(path, "components must be finite")
    return arr


def _parse_model(data, path):
    kind = _get(data, "kind", path)
    if kind == vehicles.CAR:
        return vehicles.car(float(_get(data, "w_max", path)))
    if kind == vehicles.AIRPLANE:
        return vehicles.airplane(
            float(_get(data, "w_max_xy", path)), float(_get(data, "w_max_z", path))
        )
    if kind == vehicles.SUBMARINE:
        return vehicles.submarine(
            float(_get(data, "w_max", path)),
            epsilon=float(data.get("epsilon", vehicles.DEFAULT_EPSILON)),
        )
    _fail(f"{path}.kind", f"unknown vehicle kind {kind!r}")


def _parse_ball(data, path, spatial_dim):
    center = _as_floats(_get(data, "center", path), f"{path}.center", spatial_dim)
    radius = float(_get(data, "radius", path))
    if radius <= 0.0:
        _fail(f"{path}.radius", "must be positive")
    motion = data.get("motion", {"kind": "static"})
    kind = motion.get("kind", "static")
    if kind == "static":
        return obstacle_geometry.MovingBall(center=center, radius=radius)
    if kind == "rotation":
        return obstacle_geometry.MovingBall(
            center=center,
            radius=radius,
            motion_kind=obstacle_geometry.ROTATION,
            rotation_center=_as_floats(
                _get(motion, "center", f"{path}.motion"), f"{path}.motion.center",
                spatial_dim,
            ),
            rotation_rate=float(_get(motion, "rate", f"{path}.motion")),
        )
    if kind == "linear":
        return obstacle_geometry.MovingBall(
            center=center,
            radius=radius,
            motion_kind=obstacle_geometry.LINEAR,
            velocity=_as_floats(
                _get(motion, "velocity", f"{path}.motion"),
                f"{path}.motion.velocity", spatial_dim,
            ),
        )
    _fail(f"{path}.motion.kind", f"unknown motion kind {kind!r}")


def load_raster_grid(path):
    """Read a plain-text 0/1 grid (one row per line) into occupancy[ix, iy].

    Text rows are displayed top-down, so the first row maps to the highest y
    index: the file reads like an image with the origin at the bottom left.
    """
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append([c == "1" for c in line])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ScenarioError(f"{path}: grid rows must be non-empty and equal length")
    grid = np.asarray(rows, dtype=bool)
    return grid[::-1].T.copy()  # [row, col] top-down -> [ix, iy] bottom-up


def _parse_raster(data, path, base_dir):
    grid_ref = _get(data, "grid", path)
    grid_path = Path(grid_ref)
    if not grid_path.is_absolute():
        grid_path = base_dir / grid_path
    if not grid_path.exists():
        _fail(f"{path}.grid", f"file not found: {grid_path}")
    if grid_path.suffix.lower() in (".png", ".pgm", ".jpg", ".jpeg", ".bmp"):
        from PIL import Image

        img = np.asarray(Image.open(grid_path).convert("L"))
        occupancy = (img < 128)[::-1].T.copy()  # dark pixels are obstacle
    else:
        occupancy = load_raster_grid(grid_path)
    origin = _as_floats(_get(data, "origin", path), f"{path}.origin", occupancy.ndim)
    cell_size = float(_get(data, "cell_size", path))
    r_min = float(_get(data, "r_min", path))
    region = obstacle_geometry.RasterRegion(
        grid_origin=origin, cell_size=cell_size, occupancy=occupancy
    )
    return obstacle_geometry.decompose_region(region, r_min)


def load_scenario(path):
    """Parse and validate a scenario file; raster regions are decomposed here."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"{path}: file not found")
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario file must be a mapping")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version}")

    model = _parse_model(_get(data, "model", ""), "model")
    d = model.state_dim
    start = _as_floats(_get(data, "start", ""), "start", d)
    goal = _as_floats(_get(data, "goal", ""), "goal", d)

    horizon = _get(data, "horizon", "")
    bracket = None
    if horizon == "auto":
        bracket = data.get("horizon_bracket")
        if bracket is None:
            _fail("horizon_bracket", 'required when horizon is "auto"')
        bracket = tuple(_as_floats(bracket, "horizon_bracket", 2))
    else:
        horizon = float(horizon)
        if horizon <= 0.0:
            _fail("horizon", "must be positive")

    obstacles_data = data.get("obstacles") or {}
    balls = []
    spatial_dim = model.spatial_dim
    raw_balls = obstacles_data.get("balls") or []
    if raw_balls:
        first = raw_balls[0].get("center", [])
        if len(first) in (2, 3):
            spatial_dim = len(first)
        if spatial_dim > model.spatial_dim:
            _fail("obstacles.balls[0].center",
                  f"obstacle dimension {spatial_dim} exceeds the "
                  f"{model.kind}'s spatial dimension {model.spatial_dim}")
    for i, ball_data in enumerate(raw_balls):
        balls.append(_parse_ball(ball_data, f"obstacles.balls[{i}]", spatial_dim))
    decomposed = []
    if "raster" in obstacles_data:
        decomposed = _parse_raster(
            obstacles_data["raster"], "obstacles.raster", path.parent
        )
        if balls and decomposed and decomposed[0].spatial_dim != spatial_dim:
            _fail("obstacles.raster", "raster dimension differs from ball dimension")
        if decomposed:
            spatial_dim = decomposed[0].spatial_dim
        balls.extend(decomposed)
    obstacle_set = obstacle_geometry.ObstacleSet(
        balls=tuple(balls), spatial_dim=spatial_dim
    )

    solver_data = data.get("solver") or {}
    known = {
        "sigma", "tau", "kappa", "delta", "tol", "max_iters", "eta", "n_gd",
    }
    for key in solver_data:
        if key not in known:
            _fail(f"solver.{key}", "unknown solver field")
    cfg = hopflax.SolverConfig(seed=int(data.get("seed", 0)), **solver_data)

    return Scenario(
        scenario_id=str(data.get("id", path.stem)),
        model=model,
        start=start,
        goal=goal,
        horizon=horizon,
        horizon_bracket=bracket,
        reach_tol=float(data.get("reach_tol", 0.05)),
        horizon_search_mode=str(data.get("horizon_search_mode", "bisection")),
        obstacles=obstacle_set,
        solver=cfg,
        decomposed_balls=decomposed,
    )


def _ball_to_dict(ball):
    record = {"center": [float(v) for v in ball.center],
              "radius": float(ball.radius)}
    if ball.motion_kind == obstacle_geometry.ROTATION:
        record["motion"] = {
            "kind": "rotation",
            "center": [float(v) for v in ball.rotation_center],
            "rate": float(ball.rotation_rate),
        }
    elif ball.motion_kind == obstacle_geometry.LINEAR:
        record["motion"] = {
            "kind": "linear",
            "velocity": [float(v) for v in ball.velocity],
        }
    else:
        record["motion"] = {"kind": "static"}
    return record


def write_scenario(scenario, path):
    """Emit a scenario in normalized form (raster regions already decomposed)."""
    model_data = {"kind": scenario.model.kind}
    if scenario.model.kind == vehicles.AIRPLANE:
        model_data["w_max_xy"] = scenario.model.w_max_xy
        model_data["w_max_z"] = scenario.model.w_max_z
    else:
        model_data["w_max"] = scenario.model.w_max
    if scenario.model.kind == vehicles.SUBMARINE:
        model_data["epsilon"] = scenario.model.epsilon
    cfg = scenario.solver
    data = {
        "schema_version": SCHEMA_VERSION,
        "id": scenario.scenario_id,
        "model": model_data,
        "start": [float(v) for v in scenario.start],
        "goal": [float(v) for v in scenario.goal],
        "horizon": scenario.horizon,
        "reach_tol": scenario.reach_tol,
        "obstacles": {"balls": [_ball_to_dict(b) for b in scenario.obstacles.balls]},
        "solver": {
            "sigma": cfg.sigma, "tau": cfg.tau, "kappa": cfg.kappa,
            "delta": cfg.delta, "tol": cfg.tol, "max_iters": cfg.max_iters,
            "eta": cfg.eta, "n_gd": cfg.n_gd,
        },
        "seed": cfg.seed,
    }
    if scenario.horizon == "auto":
        data["horizon_bracket"] = [float(v) for v in scenario.horizon_bracket]
        data["horizon_search_mode"] = scenario.horizon_search_mode
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


def _node_clearance(scenario, result):
    obs = scenario.obstacles
    if not obs.balls:
        return 1.0
    od = obs.spatial_dim
    states = result.trajectory.states
    t_nodes = result.trajectory.node_times
    t_phys = t_nodes[-1] - t_nodes
    return float(np.min(
        obstacle_geometry.smooth_indicator(obs, states[:, :od], t_phys)
    ))


def write_trajectory(scenario, result, path):
    """CSV trajectory: node index, equation/physical time, state, costate,
    smooth free-space indicator at the node."""
    model = scenario.model
    names = STATE_NAMES[model.kind]
    obs = scenario.obstacles
    traj = result.trajectory
    n = traj.num_steps
    horizon = n * traj.delta
    if obs.balls:
        od = obs.spatial_dim
        clearance = obstacle_geometry.smooth_indicator(
            obs, traj.states[:, :od], horizon - traj.node_times
        )
    else:
        clearance = np.ones(n + 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["j", "t_eq", "t_phys"] + names + [f"p_{c}" for c in names]
            + ["free_space"]
        )
        for j in range(n + 1):
            t_eq = j * traj.delta
            row = [j, f"{t_eq:.17g}", f"{horizon - t_eq:.17g}"]
            row += [f"{v:.17g}" for v in traj.states[j]]
            row += [f"{v:.17g}" for v in traj.costates[j]]
            row.append(f"{clearance[j]:.17g}")
            writer.writerow(row)


def write_summary(scenario, summary, path):
    data = {
        "schema_version": SCHEMA_VERSION,
        "id": summary.scenario_id,
        "value": float(summary.value),
        "iterations": int(summary.iterations),
        "converged": bool(summary.converged),
        "wall_time": float(summary.wall_time),
        "terminal_distance": float(summary.terminal_distance),
        "min_clearance": float(summary.min_clearance),
        "num_steps": int(summary.num_steps),
        "delta": float(summary.delta),
        "seed": int(summary.seed),
        "horizon": float(summary.horizon),
    }
    if scenario.decomposed_balls:
        data["decomposed_balls"] = [
            _ball_to_dict(b) for b in scenario.decomposed_balls
        ]
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


def resolve_horizon(scenario):
    if scenario.horizon != "auto":
        return float(scenario.horizon)
    t_lo, t_hi = scenario.horizon_bracket
    return hopflax.find_min_horizon(
        scenario.model, scenario.obstacles, scenario.start, scenario.goal,
        scenario.solver, t_lo, t_hi, scenario.reach_tol,
        mode=scenario.horizon_search_mode,
    )


def run(scenario, output_dir):
    """Solve a scenario and write its trajectory and summary files."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    horizon = resolve_horizon(scenario)
    result = hopflax.solve(
        scenario.model, scenario.obstacles, scenario.start, scenario.goal,
        horizon, scenario.solver,
    )
    terminal = float(np.linalg.norm(result.trajectory.states[0] - scenario.goal))
    summary = RunSummary(
        scenario_id=scenario.scenario_id,
        value=result.value,
        iterations=result.iterations,
        converged=result.converged,
        wall_time=result.wall_time,
        terminal_distance=terminal,
        min_clearance=_node_clearance(scenario, result),
        num_steps=result.trajectory.num_steps,
        delta=result.trajectory.delta,
        seed=result.seed,
        horizon=result.trajectory.num_steps * result.trajectory.delta,
    )
    write_trajectory(
        scenario, result, output_dir / f"{scenario.scenario_id}_trajectory.csv"
    )
    write_summary(
        scenario, summary, output_dir / f"{scenario.scenario_id}_summary.yaml"
    )
    return summary
