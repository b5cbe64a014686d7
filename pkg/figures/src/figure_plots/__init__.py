"""Renders trajectory planner output files into figure-style images."""
from .io import Ball, FormatError, Scene, Trajectory, read_scene, read_trajectory
from .render import PlotSpec, render, render_frame

__all__ = [
    "Ball",
    "FormatError",
    "PlotSpec",
    "Scene",
    "Trajectory",
    "read_scene",
    "read_trajectory",
    "render",
    "render_frame",
]
