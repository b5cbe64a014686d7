"""Hamiltonian kernels for the three curvature-constrained vehicle models.

Each model bundles its Hamiltonian H(x, p), the analytic proximal update for
the costate block of the splitting iteration, the state updates (closed-form
spatial, gradient-descent angular), optimal-control recovery, and a forward
kinematic rollout used for validation.

State layouts: car (x, y, theta); airplane (x, y, z, theta);
submarine (x, y, z, theta, phi).  All kernels accept batched inputs with the
state/costate on the last axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import obstacles as obstacle_geometry

CAR = "car"
AIRPLANE = "airplane"
SUBMARINE = "submarine"

DEFAULT_EPSILON = 1e-10
DEFAULT_ETA = 0.03
DEFAULT_N_GD = 3

BISECTION_SCAN_STEP = 100.0
BISECTION_SCAN_LIMIT = 1e6
BISECTION_TOL = 1e-12


class BisectionError(RuntimeError):
    """Raised when the angular-costate root bracket cannot be located."""


@dataclass(frozen=True)
class VehicleModel:
    """Immutable description of one vehicle type and its curvature bounds."""

    kind: str
    # turn bounds are scalars in normal use; an array broadcastable against a
    # draw batch is also accepted so oracle certification can vary the bound
    # per draw
    w_max: float | np.ndarray = 0.0       # max angular velocity (car, submarine)
    w_max_xy: float | np.ndarray = 0.0    # airplane planar turn bound
    w_max_z: float | np.ndarray = 0.0     # airplane vertical turn bound
    epsilon: float = DEFAULT_EPSILON  # submarine sin^2(phi) regularizer

    def __post_init__(self):
        if self.kind not in (CAR, AIRPLANE, SUBMARINE):
            raise ValueError(f"unknown vehicle kind {self.kind!r}")
        if self.kind in (CAR, SUBMARINE) and np.any(np.asarray(self.w_max) <= 0.0):
            raise ValueError("w_max must be positive")
        if self.kind == AIRPLANE and (
            np.any(np.asarray(self.w_max_xy) <= 0.0)
            or np.any(np.asarray(self.w_max_z) <= 0.0)
        ):
            raise ValueError("w_max_xy and w_max_z must be positive")

    @property
    def state_dim(self) -> int:
        return {CAR: 3, AIRPLANE: 4, SUBMARINE: 5}[self.kind]

    @property
    def spatial_dim(self) -> int:
        return 2 if self.kind == CAR else 3

    @property
    def angular_indices(self) -> tuple:
        return {CAR: (2,), AIRPLANE: (3,), SUBMARINE: (3, 4)}[self.kind]

    @property
    def control_dim(self) -> int:
        return {CAR: 2, AIRPLANE: 3, SUBMARINE: 3}[self.kind]

    @property
    def state_speed_bound(self) -> float:
        """Euclidean bound on |dx/dt| over admissible controls."""
        if self.kind == CAR:
            return float(np.sqrt(1.0 + self.w_max**2))
        if self.kind == AIRPLANE:
            return float(np.sqrt(1.0 + self.w_max_xy**2 + self.w_max_z**2))
        return float(np.sqrt(1.0 + 2.0 * self.w_max**2))


def car(w_max):
    return VehicleModel(kind=CAR, w_max=w_max)


def airplane(w_max_xy, w_max_z):
    return VehicleModel(kind=AIRPLANE, w_max_xy=w_max_xy, w_max_z=w_max_z)


def submarine(w_max, epsilon=DEFAULT_EPSILON):
    return VehicleModel(kind=SUBMARINE, w_max=w_max, epsilon=epsilon)


@dataclass(frozen=True)
class ProxContext:
    """Relaxation parameters and obstacle factor for one batch of updates.

    obstacle_factor is the free-space indicator value at the relevant spatial
    points (scalar or per-node array in [0, 1]).
    """

    delta: float
    sigma: float
    tau: float
    obstacle_factor: float | np.ndarray = 1.0

    def __post_init__(self):
        if self.delta <= 0.0 or self.sigma <= 0.0 or self.tau <= 0.0:
            raise ValueError("delta, sigma, tau must be positive")
        if self.sigma * self.tau >= 0.25:
            raise ValueError(
                f"sigma*tau = {self.sigma * self.tau} must be below 0.25"
            )


def _check_dims(model, x, p):
    if x.shape[-1] != model.state_dim or p.shape[-1] != model.state_dim:
        raise ValueError(
            f"{model.kind} expects state dimension {model.state_dim}, got "
            f"state {x.shape[-1]} / costate {p.shape[-1]}"
        )


def heading_vector(model, x):
    """Unit vector multiplying the tangential-velocity costate block."""
    x = np.asarray(x, dtype=float)
    if model.kind == CAR:
        th = x[..., 2]
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if model.kind == AIRPLANE:
        th = x[..., 3]
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    th, ph = x[..., 3], x[..., 4]
    return np.stack(
        [np.cos(th) * np.sin(ph), np.sin(th) * np.sin(ph), np.cos(ph)], axis=-1
    )


def eval_hamiltonian(model, x, p):
    """H(x, p) for the model; positively homogeneous of degree 1 in p."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    _check_dims(model, x, p)
    gamma = heading_vector(model, x)
    if model.kind == CAR:
        planar = np.abs(np.sum(gamma * p[..., :2], axis=-1))
        return planar + model.w_max * np.abs(p[..., 2])
    if model.kind == AIRPLANE:
        planar = -np.sum(gamma * p[..., :2], axis=-1)
        return (
            planar
            + model.w_max_z * np.abs(p[..., 2])
            + model.w_max_xy * np.abs(p[..., 3])
        )
    radial = np.abs(np.sum(gamma * p[..., :3], axis=-1))
    s2 = np.sin(x[..., 4]) ** 2 + model.epsilon
    return radial + model.w_max * np.sqrt(p[..., 3] ** 2 / s2 + p[..., 4] ** 2)


def _soft_threshold(b, c):
    """Shrink-toward-zero map max{0, 1 - c/|b|} b; returns 0 where b == 0."""
    mag = np.abs(b)
    safe = np.where(mag > 0.0, mag, 1.0)
    return np.where(mag > 0.0, np.maximum(0.0, 1.0 - c / safe), 0.0) * b


def _directional_shrink(gamma, beta_block, c):
    """Prox of c|gamma . q| at beta_block, gamma a unit vector.

    The gamma-component of beta is soft-thresholded; the orthogonal part
    passes through.  Degenerates to the identity when gamma . beta == 0.
    """
    g = np.sum(gamma * beta_block, axis=-1)
    mag = np.abs(g)
    safe = np.where(mag > 0.0, mag, 1.0)
    coef = np.where(mag > 0.0, np.maximum(0.0, 1.0 - c / safe) - 1.0, 0.0)
    return (coef * g)[..., None] * gamma + beta_block


def submarine_g(alpha, beta4, beta5, s2, c):
    """Root function for the submarine angular-costate prox.

    s2 is the regularized sin^2(phi); c is the obstacle-scaled delta*sigma*W.
    The root alpha* equals sqrt(p4^2/s2 + p5^2) at the minimizer; the form
    below is stable as s2 -> 0.
    """
    return (
        beta4**2 * s2 / (c + alpha * s2) ** 2
        + beta5**2 / (c + alpha) ** 2
        - 1.0
    )


def _submarine_g_prime(alpha, beta4, beta5, s2, c):
    return (
        -2.0 * beta4**2 * s2 * s2 / (c + alpha * s2) ** 3
        - 2.0 * beta5**2 / (c + alpha) ** 3
    )


def submarine_alpha_root(beta4, beta5, s2, c):
    """Unique positive root of submarine_g, elementwise over the inputs.

    Scans alpha = -c + 100k for a sign change, bisects the bracketing
    interval, then polishes with a few Newton steps so the residual is at
    machine level.  Inputs must already satisfy g(0) > 0.
    """
    beta4, beta5, s2, c = np.broadcast_arrays(
        np.asarray(beta4, float), np.asarray(beta5, float),
        np.asarray(s2, float), np.asarray(c, float),
    )
    lo = np.zeros(beta4.shape)
    hi = np.full(beta4.shape, np.nan)
    pending = np.ones(beta4.shape, dtype=bool)
    k = 1
    while pending.any():
        cand = -c + BISECTION_SCAN_STEP * k
        found = pending & (submarine_g(cand, beta4, beta5, s2, c) <= 0.0)
        hi = np.where(found, cand, hi)
        if k > 1:
            lo = np.where(found, np.maximum(0.0, cand - BISECTION_SCAN_STEP), lo)
        pending &= ~found
        k += 1
        if BISECTION_SCAN_STEP * k > BISECTION_SCAN_LIMIT:
            raise BisectionError(
                f"no sign change within alpha <= {BISECTION_SCAN_LIMIT}; "
                f"max |beta| = {np.max(np.hypot(beta4, beta5))}"
            )
    while np.max(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        pos = submarine_g(mid, beta4, beta5, s2, c) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    alpha = 0.5 * (lo + hi)
    for _ in range(4):
        gp = _submarine_g_prime(alpha, beta4, beta5, s2, c)
        step = np.where(gp != 0.0, submarine_g(alpha, beta4, beta5, s2, c)
                        / np.where(gp != 0.0, gp, 1.0), 0.0)
        alpha = np.maximum(alpha - step, 0.0)
    return alpha


def _submarine_angular_prox(beta45, phi, c, epsilon):
    """Prox of c*sqrt(q1^2/s2 + q2^2) at beta45 = (beta4, beta5)."""
    beta4, beta5 = beta45[..., 0], beta45[..., 1]
    s2 = np.broadcast_to(np.sin(phi) ** 2 + epsilon, beta4.shape)
    c = np.broadcast_to(np.asarray(c, float), beta4.shape)
    out = np.zeros(beta45.shape)
    # c == 0: the prox is the identity (obstacle factor fully suppressed it)
    trivial = c <= 0.0
    # g(0) <= 0: beta lies in the subdifferential ball and the prox is zero
    inside = (beta4**2 * s2 + beta5**2 <= c**2) & ~trivial
    active = ~trivial & ~inside
    if active.any():
        alpha = submarine_alpha_root(
            beta4[active], beta5[active], s2[active], c[active]
        )
        a_s2 = alpha * s2[active]
        out[active, 0] = beta4[active] * a_s2 / (a_s2 + c[active])
        out[active, 1] = beta5[active] * alpha / (alpha + c[active])
    out[trivial] = beta45[trivial]
    return out


def prox_p(model, x_prev, beta, ctx):
    """Analytic costate update: argmin over p of ds*H(x_prev, p) + 0.5|p - beta|^2.

    ds = ctx.obstacle_factor * ctx.delta * ctx.sigma.  x_prev supplies the
    angles defining the heading vector; only those components are read.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    beta = np.asarray(beta, dtype=float)
    _check_dims(model, x_prev, beta)
    ds = np.asarray(ctx.obstacle_factor, float) * ctx.delta * ctx.sigma
    gamma = heading_vector(model, x_prev)
    out = np.empty(np.broadcast_shapes(x_prev.shape, beta.shape))
    b = np.broadcast_to(beta, out.shape)
    if model.kind == CAR:
        out[..., :2] = _directional_shrink(gamma, b[..., :2], ds)
        out[..., 2] = _soft_threshold(b[..., 2], ds * model.w_max)
    elif model.kind == AIRPLANE:
        out[..., :2] = b[..., :2] + ds[..., None] * gamma
        out[..., 2] = _soft_threshold(b[..., 2], ds * model.w_max_z)
        out[..., 3] = _soft_threshold(b[..., 3], ds * model.w_max_xy)
    else:
        out[..., :3] = _directional_shrink(gamma, b[..., :3], ds)
        out[..., 3:] = _submarine_angular_prox(
            b[..., 3:], x_prev[..., 4], ds * model.w_max, model.epsilon
        )
    return out


def update_x0(model, x0_prev, p1, goal, tau):
    """Free-endpoint update: prox of tau |x - goal| at x0_prev + tau p1."""
    x0_prev = np.asarray(x0_prev, dtype=float)
    goal = np.asarray(goal, dtype=float)
    w = x0_prev - goal + tau * np.asarray(p1, dtype=float)
    norm = np.sqrt(np.sum(w * w, axis=-1))
    safe = np.where(norm > 0.0, norm, 1.0)
    scale = np.where(norm > 0.0, np.maximum(0.0, 1.0 - tau / safe), 0.0)
    return goal + scale[..., None] * w


def update_x_spatial(model, x_prev, p_j, p_jplus1, ctx, obs, t_j,
                     eta=DEFAULT_ETA, n_gd=DEFAULT_N_GD):
    """Spatial-state update.

    Obstacle-free the minimizer is the closed form nu = x_spatial - tau *
    (p_spatial_j - p_spatial_{j+1}).  With obstacles, runs n_gd gradient
    descent steps from nu on
    h(xs) = -delta*tau*O(xs, t_j)*H(x_prev, p_j) + 0.5|xs - nu|^2.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    p_jplus1 = np.asarray(p_jplus1, dtype=float)
    sd = model.spatial_dim
    nu = x_prev[..., :sd] - ctx.tau * (p_j[..., :sd] - p_jplus1[..., :sd])
    if obs is None or not obs.balls:
        return nu
    od = obs.spatial_dim
    coef = ctx.delta * ctx.tau * eval_hamiltonian(model, x_prev, p_j)
    xs = nu.copy()
    for _ in range(n_gd):
        grad_o = obstacle_geometry.smooth_indicator_gradient(obs, xs[..., :od], t_j)
        grad = xs - nu
        grad[..., :od] -= coef[..., None] * grad_o
        xs = xs - eta * grad
    return xs


def angular_objective_gradient(model, theta_block, p_j, nu_angular, dto):
    """Gradient of the angular descent objective h at theta_block.

    dto is the obstacle-scaled delta*tau.  The subgradient of |.| at 0 is
    taken as 0 via sign(0) = 0.
    """
    p_j = np.asarray(p_j, dtype=float)
    if model.kind == CAR:
        th = theta_block[..., 0]
        q = p_j[..., 0] * np.cos(th) + p_j[..., 1] * np.sin(th)
        dq = -p_j[..., 0] * np.sin(th) + p_j[..., 1] * np.cos(th)
        g = -dto * np.sign(q) * dq + (th - nu_angular[..., 0])
        return g[..., None]
    if model.kind == AIRPLANE:
        th = theta_block[..., 0]
        dq = -p_j[..., 0] * np.sin(th) + p_j[..., 1] * np.cos(th)
        g = dto * dq + (th - nu_angular[..., 0])
        return g[..., None]
    th, ph = theta_block[..., 0], theta_block[..., 1]
    sph, cph = np.sin(ph), np.cos(ph)
    q = (p_j[..., 0] * np.cos(th) + p_j[..., 1] * np.sin(th)) * sph \
        + p_j[..., 2] * cph
    dq_dth = (-p_j[..., 0] * np.sin(th) + p_j[..., 1] * np.cos(th)) * sph
    dq_dph = (p_j[..., 0] * np.cos(th) + p_j[..., 1] * np.sin(th)) * cph \
        - p_j[..., 2] * sph
    s2 = sph**2 + model.epsilon
    root = np.sqrt(p_j[..., 3] ** 2 / s2 + p_j[..., 4] ** 2)
    safe = np.where(root > 0.0, root, 1.0)
    droot_dph = np.where(
        root > 0.0, -(p_j[..., 3] ** 2) * sph * cph / (s2 * s2 * safe), 0.0
    )
    g_th = -dto * np.sign(q) * dq_dth + (th - nu_angular[..., 0])
    g_ph = -dto * (np.sign(q) * dq_dph + model.w_max * droot_dph) \
        + (ph - nu_angular[..., 1])
    return np.stack([g_th, g_ph], axis=-1)


def update_x_angular(model, x_prev, p_j, p_jplus1, ctx, obstacle_factor=None,
                     eta=DEFAULT_ETA, n_gd=DEFAULT_N_GD):
    """Angular-state update by n_gd gradient descent steps from the nu point."""
    x_prev = np.asarray(x_prev, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    p_jplus1 = np.asarray(p_jplus1, dtype=float)
    if obstacle_factor is None:
        obstacle_factor = ctx.obstacle_factor
    dto = np.asarray(obstacle_factor, float) * ctx.delta * ctx.tau
    ai = list(model.angular_indices)
    nu = x_prev[..., ai] - ctx.tau * (p_j[..., ai] - p_jplus1[..., ai])
    theta = nu.copy()
    for _ in range(n_gd):
        theta = theta - eta * angular_objective_gradient(model, theta, p_j, nu, dto)
    return theta


def _sign0(v):
    return np.sign(v)


def recover_controls(model, x, p):
    """Optimal control from the costate: the minimizer of <f(x, a), p> over a.

    sign(0) is taken as 0.  Returns (v, omega) for the car,
    (v, omega_xy, omega_z) for the airplane, (v, omega_1, omega_2) for the
    submarine.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    _check_dims(model, x, p)
    gamma = heading_vector(model, x)
    if model.kind == CAR:
        v = -_sign0(np.sum(gamma * p[..., :2], axis=-1))
        om = -_sign0(p[..., 2])
        return np.stack([v, om], axis=-1)
    if model.kind == AIRPLANE:
        v = np.ones(x.shape[:-1])
        om_xy = -_sign0(p[..., 3])
        om_z = -_sign0(p[..., 2])
        return np.stack([v, om_xy, om_z], axis=-1)
    v = -_sign0(np.sum(gamma * p[..., :3], axis=-1))
    s2 = np.sin(x[..., 4]) ** 2 + model.epsilon
    root = np.sqrt(p[..., 3] ** 2 / s2 + p[..., 4] ** 2)
    safe = np.where(root > 0.0, root, 1.0)
    om1 = np.where(root > 0.0, -(p[..., 3] / s2) / safe, 0.0)
    om2 = np.where(root > 0.0, -p[..., 4] / safe, 0.0)
    return np.stack([v, om1, om2], axis=-1)


def rollout_dynamics(model, start, controls, delta):
    """Forward-Euler rollout of the kinematics under given controls.

    controls has shape (N, control_dim); returns states of shape
    (N+1, state_dim).  Used for validation, not planning.
    """
    start = np.asarray(start, dtype=float)
    controls = np.atleast_2d(np.asarray(controls, dtype=float))
    if start.shape[-1] != model.state_dim:
        raise ValueError(f"start must have {model.state_dim} components")
    if controls.shape[-1] != model.control_dim:
        raise ValueError(f"controls must have {model.control_dim} components")
    if np.any(np.abs(controls) > 1.0 + 1e-9):
        raise ValueError("control components must lie in [-1, 1]")
    n = controls.shape[0]
    states = np.empty((n + 1, model.state_dim))
    states[0] = start
    for i in range(n):
        s = states[i]
        u = controls[i]
        if model.kind == CAR:
            th = s[2]
            ds = np.array([u[0] * np.cos(th), u[0] * np.sin(th),
                           u[1] * model.w_max])
        elif model.kind == AIRPLANE:
            th = s[3]
            ds = np.array([u[0] * np.cos(th), u[0] * np.sin(th),
                           u[2] * model.w_max_z, u[1] * model.w_max_xy])
        else:
            th, ph = s[3], s[4]
            if np.sqrt(u[1] ** 2 * np.sin(ph) ** 2 + u[2] ** 2) > 1.0 + 1e-9:
                raise ValueError(
                    f"submarine curvature constraint violated at step {i}"
                )
            ds = np.array([
                u[0] * np.cos(th) * np.sin(ph),
                u[0] * np.sin(th) * np.sin(ph),
                u[0] * np.cos(ph),
                u[1] * model.w_max,
                u[2] * model.w_max,
            ])
        states[i + 1] = s + delta * ds
    return states
