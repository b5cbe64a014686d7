"""Independent brute-force oracles used to certify the analytic kernels.

The prox oracle minimizes the prox objective by nested one-dimensional
ternary searches and is deliberately written without reference to the
analytic update formulas; the Hamiltonian terms are re-stated inline, block
by block.
"""
from __future__ import annotations

import numpy as np

from . import vehicles


class UnsupportedCaseError(ValueError):
    """Raised when an oracle's alignment preconditions do not hold."""


def nested_scan(objective, center, half_width, levels, points_per_axis):
    """Minimize objective over a box by repeated refine-around-incumbent.

    objective maps an (M, d) array of candidates to (M,) values.  Each level
    shrinks the box half-width by a factor 5 around the incumbent;
    half_width may be a scalar or one value per axis.
    """
    best = np.asarray(center, dtype=float).copy()
    d = best.shape[0]
    hw = np.broadcast_to(np.asarray(half_width, dtype=float), (d,)).copy()
    for _ in range(levels):
        axes = [
            np.linspace(c - h, c + h, points_per_axis)
            for c, h in zip(best, hw)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = objective(grid)
        best = grid[int(np.argmin(vals))]
        hw /= 5.0
    return best


def _ternary_min(f, lo, hi, iters):
    """Elementwise ternary search for the minimizer of a 1D convex function.

    f maps arrays to arrays; lo/hi bracket the minimizer elementwise.  The
    bracket shrinks by (2/3) per iteration.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    for _ in range(iters):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        take_lo = f(m1) <= f(m2)
        hi = np.where(take_lo, m2, hi)
        lo = np.where(take_lo, lo, m1)
    return 0.5 * (lo + hi)


def convex_block_min(f, lo, hi, iters=42):
    """Minimize a jointly convex function over a box by nested ternary search.

    f maps (..., d) candidate arrays to (...) values; lo/hi bracket the
    minimizer per coordinate.  The first coordinate is searched over the
    partial minimum of the remaining ones, which is again convex, so the
    search is exact up to the bracket resolution.  Vectorizes over any
    leading batch axes.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.shape[-1]
    if d == 1:
        t = _ternary_min(lambda s: f(s[..., None]), lo[..., 0], hi[..., 0], iters)
        return t[..., None]

    def with_head(t, rest):
        return np.concatenate([t[..., None], rest], axis=-1)

    def tail_min(t):
        return convex_block_min(
            lambda r: f(with_head(t, r)), lo[..., 1:], hi[..., 1:], iters
        )

    head = _ternary_min(
        lambda t: f(with_head(t, tail_min(t))), lo[..., 0], hi[..., 0], iters
    )
    return with_head(head, tail_min(head))


def prox_oracle(model, x_prev, beta, ctx, iters=36):
    """Brute-force minimizer of ds*H(x_prev, p) + 0.5|p - beta|^2.

    Exploits only the block separability of the Hamiltonians (tangential
    costate block vs. angular blocks); each block objective is strictly
    convex and is minimized by nested ternary searches bracketed around
    beta.  Batched over leading axes of x_prev/beta.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    beta = np.asarray(beta, dtype=float)
    batch = np.broadcast_shapes(x_prev.shape[:-1], beta.shape[:-1])
    ds = np.broadcast_to(
        np.asarray(ctx.obstacle_factor, float) * ctx.delta * ctx.sigma, batch
    )
    b = np.broadcast_to(beta, batch + (model.state_dim,))
    out = np.empty(b.shape)

    def minimize(term, block):
        # every prox component either shrinks toward 0 or shifts by at most
        # ds times the largest turn bound, so [0, beta] plus that margin
        # brackets the minimizer
        w_bound = max(
            1.0,
            float(np.max(model.w_max)),
            float(np.max(model.w_max_xy)),
            float(np.max(model.w_max_z)),
        )
        span = 1.0 + np.max(np.abs(ds)) * w_bound
        f = lambda q: term(q) + 0.5 * np.sum((q - block) ** 2, axis=-1)
        lo = np.minimum(block, 0.0) - span
        hi = np.maximum(block, 0.0) + span
        q = convex_block_min(f, lo, hi, iters)
        # restart in a shrunken bracket around the incumbent: the nested
        # search resolves roughly 1e-4 of the bracket width per pass, so each
        # restart bracket comfortably covers the previous residual while
        # multiplying the resolution
        hw = hi - lo
        for _ in range(2):
            hw = hw * 5e-3
            q = convex_block_min(f, q - hw, q + hw, iters)
        return q

    if model.kind == vehicles.CAR:
        th = x_prev[..., 2]
        g = np.stack([np.cos(th), np.sin(th)], axis=-1)
        out[..., :2] = minimize(
            lambda q: ds * np.abs(np.sum(q * g, axis=-1)), b[..., :2]
        )
        out[..., 2:] = minimize(
            lambda q: ds * model.w_max * np.abs(q[..., 0]), b[..., 2:]
        )
    elif model.kind == vehicles.AIRPLANE:
        th = x_prev[..., 3]
        g = np.stack([np.cos(th), np.sin(th)], axis=-1)
        out[..., :2] = minimize(
            lambda q: -ds * np.sum(q * g, axis=-1), b[..., :2]
        )
        out[..., 2:3] = minimize(
            lambda q: ds * model.w_max_z * np.abs(q[..., 0]), b[..., 2:3]
        )
        out[..., 3:] = minimize(
            lambda q: ds * model.w_max_xy * np.abs(q[..., 0]), b[..., 3:]
        )
    else:
        th, ph = x_prev[..., 3], x_prev[..., 4]
        g = np.stack(
            [np.cos(th) * np.sin(ph), np.sin(th) * np.sin(ph), np.cos(ph)],
            axis=-1,
        )
        s2 = np.sin(ph) ** 2 + model.epsilon
        out[..., :3] = minimize(
            lambda q: ds * np.abs(np.sum(q * g, axis=-1)), b[..., :3]
        )
        out[..., 3:] = minimize(
            lambda q: ds * model.w_max
            * np.sqrt(q[..., 0] ** 2 / s2 + q[..., 1] ** 2),
            b[..., 3:],
        )
    return out


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad


def straightline_oracle(start, goal, model, tol=1e-8):
    """Exact minimal travel time for an aligned free-space straight drive.

    Requires the headings at start and goal to point along the start-to-goal
    segment and the angular components to agree; the minimal time is then the
    spatial distance at unit speed.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    sd = model.spatial_dim
    disp = goal[:sd] - start[:sd]
    dist = float(np.linalg.norm(disp))
    if dist == 0.0:
        return 0.0
    ai = list(model.angular_indices)
    if np.max(np.abs(start[ai] - goal[ai])) > tol:
        raise UnsupportedCaseError("start and goal angles differ")
    direction = disp / dist
    h_start = vehicles.heading_vector(model, start)
    if h_start.shape[0] < sd:
        # car heading is planar; require no displacement in unmodeled axes
        direction = direction[: h_start.shape[0]]
    if np.max(np.abs(h_start - direction)) > 1e-6:
        raise UnsupportedCaseError("heading is not aligned with the segment")
    return dist
