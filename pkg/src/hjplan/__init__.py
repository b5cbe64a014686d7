"""Curvature-constrained trajectory planning via pointwise Hopf-Lax solves."""

from .obstacles import MovingBall, ObstacleSet, RasterRegion, decompose_region
from .solver import (
    DiscreteTrajectory,
    NotReachableError,
    SolveResult,
    SolverConfig,
    SolverDivergedError,
    extract_physical_path,
    find_min_horizon,
    solve,
)
from .vehicles import ProxContext, VehicleModel, airplane, car, submarine

__all__ = [
    "MovingBall",
    "ObstacleSet",
    "RasterRegion",
    "decompose_region",
    "DiscreteTrajectory",
    "NotReachableError",
    "SolveResult",
    "SolverConfig",
    "SolverDivergedError",
    "extract_physical_path",
    "find_min_horizon",
    "solve",
    "ProxContext",
    "VehicleModel",
    "airplane",
    "car",
    "submarine",
]
