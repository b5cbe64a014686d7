"""Time-varying obstacle sets built from moving balls.

Obstacles are unions of disjoint balls whose centers follow simple motion
laws (static, rotation about a point, constant velocity).  The free-space
indicator is smoothed with a steep tanh of the signed distance so that its
gradient is available to the solver's descent steps.  Arbitrary rasterized
obstacle regions can be decomposed into disjoint balls with a greedy
largest-inscribed-ball loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

# Signed distance reported for an empty obstacle set ("infinitely far
# outside"), keeps indicator/smoothing total without branching in callers.
EMPTY_SET_DISTANCE = -1e30

DEFAULT_STEEPNESS = 100.0

STATIC = "static"
ROTATION = "rotation"
LINEAR = "linear"


@dataclass(frozen=True)
class MovingBall:
    """A ball with a time-parameterized center.

    Motion laws are expressed in physical time: center_at(0) is the ball's
    position when the vehicle departs.  The solver applies the reversal to
    its own (time-reversed) node times internally.
    """

    center: np.ndarray
    radius: float
    motion_kind: str = STATIC
    rotation_center: np.ndarray | None = None
    rotation_rate: float = 0.0          # radians per unit time, CCW positive
    velocity: np.ndarray | None = None  # length per unit time

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0.0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        if self.motion_kind not in (STATIC, ROTATION, LINEAR):
            raise ValueError(f"unknown motion kind {self.motion_kind!r}")
        if self.motion_kind == ROTATION:
            if self.rotation_center is None:
                raise ValueError("rotation motion requires a rotation center")
            object.__setattr__(
                self, "rotation_center", np.asarray(self.rotation_center, dtype=float)
            )
        if self.motion_kind == LINEAR:
            if self.velocity is None:
                raise ValueError("linear motion requires a velocity")
            object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))

    @property
    def spatial_dim(self) -> int:
        return self.center.shape[0]

    def center_at(self, t):
        """Center position at time(s) t; returns shape t.shape + (dim,)."""
        t = np.asarray(t, dtype=float)
        out = np.broadcast_to(self.center, t.shape + self.center.shape).copy()
        if self.motion_kind == STATIC:
            return out
        if self.motion_kind == LINEAR:
            return out + t[..., None] * self.velocity
        # rotation: rotate the xy-components about the rotation center; any
        # further components (z) are carried along unchanged
        ang = self.rotation_rate * t
        c, s = np.cos(ang), np.sin(ang)
        rel = self.center[:2] - self.rotation_center[:2]
        out[..., 0] = self.rotation_center[0] + c * rel[0] - s * rel[1]
        out[..., 1] = self.rotation_center[1] + s * rel[0] + c * rel[1]
        return out


@dataclass(frozen=True)
class ObstacleSet:
    """An immutable collection of moving balls in 2 or 3 spatial dimensions."""

    balls: tuple = ()
    spatial_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        for i, b in enumerate(self.balls):
            if b.spatial_dim != self.spatial_dim:
                raise ValueError(
                    f"ball {i} has dimension {b.spatial_dim}, "
                    f"expected {self.spatial_dim}"
                )

    def __len__(self):
        return len(self.balls)

    @classmethod
    def empty(cls, spatial_dim=2):
        return cls(balls=(), spatial_dim=spatial_dim)


@dataclass(frozen=True)
class RasterRegion:
    """A rasterized obstacle region: dense boolean occupancy on a uniform grid.

    occupancy is indexed [ix, iy(, iz)] with cell centers at
    grid_origin + (index + 0.5) * cell_size.
    """

    grid_origin: np.ndarray
    cell_size: float
    occupancy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid_origin", np.asarray(self.grid_origin, dtype=float))
        object.__setattr__(self, "occupancy", np.asarray(self.occupancy, dtype=bool))
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")
        if self.occupancy.ndim != self.grid_origin.shape[0]:
            raise ValueError(
                f"occupancy is {self.occupancy.ndim}-dimensional but origin has "
                f"{self.grid_origin.shape[0]} components"
            )


def _ball_distances(obs, x, t):
    """Stacked per-ball signed distances, shape (L,) + broadcast shape."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    dists = []
    for ball in obs.balls:
        c = ball.center_at(t)
        diff = x - c
        dists.append(ball.radius - np.sqrt(np.sum(diff * diff, axis=-1)))
    return np.stack(dists, axis=0)


def signed_distance(obs, x, t):
    """Signed distance to the obstacle set, positive inside the obstacles.

    For a union of balls this is max_l (r_l - |x - c_l(t)|).  An empty set
    returns the large negative sentinel EMPTY_SET_DISTANCE.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], t.shape)
    if not obs.balls:
        return np.full(shape, EMPTY_SET_DISTANCE) if shape else EMPTY_SET_DISTANCE
    d = _ball_distances(obs, x, t).max(axis=0)
    return d if shape else float(d)


def indicator(obs, x, t):
    """Exact free-space indicator: 1 outside the obstacles, 0 strictly inside."""
    d = np.asarray(signed_distance(obs, x, t))
    out = np.where(d > 0.0, 0.0, 1.0)
    return out if out.shape else float(out)


def smooth_indicator(obs, x, t, steepness=DEFAULT_STEEPNESS):
    """Smoothed free-space indicator 1/2 + 1/2 tanh(-k d), k = steepness."""
    d = signed_distance(obs, x, t)
    return 0.5 + 0.5 * np.tanh(-steepness * np.asarray(d))


def _sech_sq(z):
    # clip: sech^2 underflows to 0 long before the clip bound matters
    return 1.0 / np.cosh(np.clip(z, -30.0, 30.0)) ** 2


def smooth_indicator_gradient(obs, x, t, steepness=DEFAULT_STEEPNESS):
    """Spatial gradient of the smoothed indicator.

    grad d is the unit vector from x toward the nearest ball center (zero at
    the degenerate point x == center); ties go to the lowest ball index.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], t.shape) + x.shape[-1:]
    if not obs.balls:
        return np.zeros(shape)
    dists = _ball_distances(obs, x, t)
    nearest = dists.argmax(axis=0)
    d = np.take_along_axis(dists, nearest[None], axis=0)[0]
    centers = np.stack([b.center_at(t) for b in obs.balls], axis=0)
    centers = np.broadcast_to(centers, dists.shape + x.shape[-1:])
    c = np.take_along_axis(centers, nearest[None, ..., None], axis=0)[0]
    diff = np.broadcast_to(x, shape) - c
    norm = np.sqrt(np.sum(diff * diff, axis=-1))
    safe = np.where(norm > 0.0, norm, 1.0)
    grad_d = np.where((norm > 0.0)[..., None], -diff / safe[..., None], 0.0)
    return -0.5 * steepness * _sech_sq(steepness * d)[..., None] * grad_d


def decompose_region(region, r_min, max_balls=100000):
    """Greedy decomposition of a raster region into disjoint static balls.

    Repeatedly inscribes the largest ball in the remaining region (center at
    the maximizer of the inside-positive distance field, radius equal to the
    maximum) and removes it, until the largest inscribed radius drops below
    r_min.  Distances are exact Euclidean distances on the grid.
    """
    if r_min <= region.cell_size:
        raise ValueError(
            f"r_min ({r_min}) must exceed the cell size ({region.cell_size})"
        )
    occ = region.occupancy.copy()
    if not occ.any():
        return []
    # pad with a free-space ring so region cells at the array edge are treated
    # as adjacent to free space
    occ = np.pad(occ, 1, constant_values=False)
    cell = region.cell_size
    balls = []
    idx_grids = np.indices(occ.shape)
    for _ in range(max_balls):
        if not occ.any():
            break
        dist = distance_transform_edt(occ, sampling=cell)
        peak = np.unravel_index(np.argmax(dist), dist.shape)
        r = float(dist[peak])
        if r < r_min:
            break
        center = region.grid_origin + (np.asarray(peak, dtype=float) - 1 + 0.5) * cell
        balls.append(MovingBall(center=center, radius=r))
        dd = np.zeros(occ.shape)
        for ax in range(occ.ndim):
            dd += (cell * (idx_grids[ax] - peak[ax])) ** 2
        occ &= dd > r * r
    return balls
