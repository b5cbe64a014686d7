"""Readers for the planner's trajectory, summary, and scenario files.

This package talks to the planner only through its documented file formats:
trajectory CSV (one row per path node), summary YAML, and scenario YAML.
Obstacle motion laws are part of the scenario file and are re-evaluated
here so circles can be drawn at the correct position for any frame time.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

REQUIRED_COLUMNS = ("j", "t_eq", "t_phys", "x", "y", "free_space")


class FormatError(ValueError):
    """An input file does not match the planner's documented format."""


@dataclass
class Trajectory:
    """One planned path, rows sorted by increasing physical time."""

    t_phys: np.ndarray           # (n,)
    states: np.ndarray           # (n, state_dim)
    state_names: list[str]
    free_space: np.ndarray       # (n,)

    @property
    def horizon(self) -> float:
        return float(self.t_phys[-1])

    @property
    def has_z(self) -> bool:
        return "z" in self.state_names


@dataclass
class Ball:
    center: np.ndarray
    radius: float
    motion_kind: str = "static"
    rotation_center: np.ndarray | None = None
    rotation_rate: float = 0.0
    velocity: np.ndarray | None = None

    def center_at(self, t: float) -> np.ndarray:
        """Ball center at physical time t (t = 0 is vehicle departure)."""
        if self.motion_kind == "rotation":
            a = self.rotation_rate * t
            rel = self.center - self.rotation_center
            rot = np.array([
                rel[0] * np.cos(a) - rel[1] * np.sin(a),
                rel[0] * np.sin(a) + rel[1] * np.cos(a),
            ])
            out = self.rotation_center.copy()
            out[:2] = self.rotation_center[:2] + rot
            return out
        if self.motion_kind == "linear":
            return self.center + t * self.velocity
        return self.center


@dataclass
class Scene:
    """The scenario fields the renderer needs: endpoints and obstacles."""

    start: np.ndarray
    goal: np.ndarray
    balls: list[Ball] = field(default_factory=list)


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty trajectory file") from None
        rows = list(reader)
    for column in REQUIRED_COLUMNS:
        if column not in header:
            raise FormatError(f"{path}: missing required column {column!r}")
    state_names = [
        name for name in header
        if name not in ("j", "t_eq", "t_phys", "free_space")
        and not name.startswith("p_")
    ]
    if not rows:
        raise FormatError(f"{path}: trajectory has no nodes")
    try:
        data = np.asarray(rows, dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric cell ({exc})") from None
    columns = {name: data[:, i] for i, name in enumerate(header)}
    order = np.argsort(columns["t_phys"])
    states = np.stack([columns[name][order] for name in state_names], axis=-1)
    return Trajectory(
        t_phys=columns["t_phys"][order],
        states=states,
        state_names=state_names,
        free_space=columns["free_space"][order],
    )


def _as_array(value):
    return np.asarray(value, dtype=float)


def _parse_ball(data) -> Ball:
    motion = data.get("motion") or {"kind": "static"}
    kind = motion.get("kind", "static")
    ball = Ball(center=_as_array(data["center"]), radius=float(data["radius"]),
                motion_kind=kind)
    if kind == "rotation":
        ball.rotation_center = _as_array(motion["center"])
        ball.rotation_rate = float(motion["rate"])
    elif kind == "linear":
        ball.velocity = _as_array(motion["velocity"])
    elif kind != "static":
        raise FormatError(f"unknown obstacle motion kind {kind!r}")
    return ball


def read_scene(scenario_path, summary_path=None) -> Scene:
    """Extract endpoints and obstacle balls from a scenario file.

    Raster regions are preprocessed by the planner; their decomposed balls
    are recorded in the run summary, so pass summary_path to pick them up.
    """
    with open(scenario_path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise FormatError(f"{scenario_path}: scenario file must be a mapping")
    for key in ("start", "goal"):
        if key not in data:
            raise FormatError(f"{scenario_path}: missing required field {key!r}")
    balls = [
        _parse_ball(ball)
        for ball in (data.get("obstacles") or {}).get("balls") or []
    ]
    if summary_path is not None:
        with open(summary_path) as fh:
            summary = yaml.safe_load(fh)
        balls += [_parse_ball(b) for b in summary.get("decomposed_balls") or []]
    return Scene(start=_as_array(data["start"]), goal=_as_array(data["goal"]),
                 balls=balls)
