"""Frame rendering: path-so-far, obstacle circles, start/goal markers."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle

from .io import FormatError, Scene, Trajectory, read_scene, read_trajectory

VIEWS = ("planar", "3d", "3d+projection")
DPI = 110
PANEL_SIZE = 5.0

PATH_STYLE = {"color": "tab:blue", "linewidth": 2.0}
FUTURE_STYLE = {"color": "tab:blue", "linewidth": 0.8, "alpha": 0.25}
OBSTACLE_STYLE = {"facecolor": "0.55", "edgecolor": "0.25", "alpha": 0.8}


@dataclass
class PlotSpec:
    """What to draw: which files, which frame times, which view."""

    trajectory: Path
    scenario: Path | None = None
    summary: Path | None = None
    view: str = "planar"
    frames: list[float] = field(default_factory=lambda: [0.0])

    def __post_init__(self):
        if self.view not in VIEWS:
            raise FormatError(
                f"unknown view {self.view!r}; expected one of {VIEWS}"
            )
        if not self.frames:
            raise FormatError("at least one frame time is required")


def _check_frames(spec: PlotSpec, traj: Trajectory) -> None:
    horizon = traj.horizon
    for t in spec.frames:
        if not 0.0 <= t <= horizon + 1e-9:
            raise FormatError(
                f"frame time {t} outside the trajectory horizon [0, {horizon}]"
            )


def _split_path(traj: Trajectory, t: float):
    done = traj.t_phys <= t + 1e-9
    return traj.states[done], traj.states[~done]


def _draw_markers(ax, scene: Scene | None, traj: Trajectory, dims):
    start = scene.start if scene is not None else traj.states[0]
    goal = scene.goal if scene is not None else traj.states[-1]
    ax.scatter(*[start[d] for d in dims], marker="o", color="tab:green",
               s=60, zorder=5, label="start")
    ax.scatter(*[goal[d] for d in dims], marker="*", color="tab:red",
               s=120, zorder=5, label="goal")


def _draw_circles(ax, scene: Scene | None, t: float):
    if scene is None:
        return
    for ball in scene.balls:
        center = ball.center_at(t)
        ax.add_patch(Circle(center[:2], ball.radius, **OBSTACLE_STYLE))


def _draw_spheres(ax3d, scene: Scene | None, t: float):
    if scene is None:
        return
    u = np.linspace(0.0, 2.0 * np.pi, 24)
    v = np.linspace(0.0, np.pi, 12)
    sx = np.outer(np.cos(u), np.sin(v))
    sy = np.outer(np.sin(u), np.sin(v))
    sz = np.outer(np.ones_like(u), np.cos(v))
    for ball in scene.balls:
        c = ball.center_at(t)
        cz = c[2] if c.shape[0] > 2 else 0.0
        ax3d.plot_surface(
            c[0] + ball.radius * sx, c[1] + ball.radius * sy,
            cz + ball.radius * sz,
            color="0.55", alpha=0.35, linewidth=0, shade=True,
        )


def _planar_axes(ax, traj: Trajectory, scene: Scene | None, t: float):
    done, future = _split_path(traj, t)
    if future.shape[0]:
        ax.plot(future[:, 0], future[:, 1], **FUTURE_STYLE)
    if done.shape[0]:
        ax.plot(done[:, 0], done[:, 1], **PATH_STYLE)
    _draw_circles(ax, scene, t)
    _draw_markers(ax, scene, traj, dims=(0, 1))
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")


def _spatial_axes(ax3d, traj: Trajectory, scene: Scene | None, t: float):
    done, future = _split_path(traj, t)
    if future.shape[0]:
        ax3d.plot(future[:, 0], future[:, 1], future[:, 2], **FUTURE_STYLE)
    if done.shape[0]:
        ax3d.plot(done[:, 0], done[:, 1], done[:, 2], **PATH_STYLE)
    _draw_spheres(ax3d, scene, t)
    _draw_markers(ax3d, scene, traj, dims=(0, 1, 2))
    ax3d.set_xlabel("x")
    ax3d.set_ylabel("y")
    ax3d.set_zlabel("z")


def render_frame(traj: Trajectory, scene: Scene | None, t: float, view: str):
    """Build the figure for one frame time; the caller owns the figure."""
    if view == "planar":
        fig, ax = plt.subplots(figsize=(PANEL_SIZE, PANEL_SIZE), dpi=DPI)
        _planar_axes(ax, traj, scene, t)
    elif view == "3d":
        if not traj.has_z:
            raise FormatError("3d view requires a z column in the trajectory")
        fig = plt.figure(figsize=(PANEL_SIZE, PANEL_SIZE), dpi=DPI)
        _spatial_axes(fig.add_subplot(projection="3d"), traj, scene, t)
    else:  # 3d+projection: 3D on the left, xy projection on the right
        if not traj.has_z:
            raise FormatError("3d view requires a z column in the trajectory")
        fig = plt.figure(figsize=(2 * PANEL_SIZE, PANEL_SIZE), dpi=DPI)
        _spatial_axes(fig.add_subplot(1, 2, 1, projection="3d"),
                      traj, scene, t)
        _planar_axes(fig.add_subplot(1, 2, 2), traj, scene, t)
    fig.suptitle(f"t = {t:g}")
    return fig


def render(spec: PlotSpec, out_path) -> list[Path]:
    """Write one image per frame time; returns the written paths.

    out_path is the base name: frame i lands in <base>_frame<i>.png (the
    extension of out_path, if any, decides the image format).
    """
    traj = read_trajectory(spec.trajectory)
    scene = None
    if spec.scenario is not None:
        scene = read_scene(spec.scenario, spec.summary)
    _check_frames(spec, traj)
    out_path = Path(out_path)
    suffix = out_path.suffix or ".png"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for i, t in enumerate(spec.frames):
        fig = render_frame(traj, scene, t, spec.view)
        target = out_path.with_suffix("").parent / (
            f"{out_path.with_suffix('').name}_frame{i}{suffix}"
        )
        fig.savefig(target)
        plt.close(fig)
        written.append(target)
    return written
