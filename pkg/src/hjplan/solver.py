"""Pointwise Hopf-Lax solver via alternating primal-dual splitting.

Solves u(x, t) for the level-set HJB equation of one vehicle model at a
single query point by discretizing the variational path problem into N
uniform steps and alternating analytic costate proximal updates with
(mostly) analytic state updates, plus over-relaxation.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import obstacles as obstacle_geometry
from . import vehicles


class SolverDivergedError(RuntimeError):
    """Non-finite values appeared during the iteration."""


class NotReachableError(RuntimeError):
    """Horizon search predicate never became true inside the bracket."""


@dataclass(frozen=True)
class SolverConfig:
    sigma: float = 1.0
    tau: float = 0.2
    kappa: float = 1.0
    delta: float = 0.1
    tol: float = 1e-3
    max_iters: int = 100000
    eta: float = 0.03
    n_gd: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.sigma * self.tau >= 0.25:
            raise ValueError("sigma*tau must be below 0.25")
        if not (0.0 <= self.kappa <= 1.0):
            raise ValueError("kappa must lie in [0, 1]")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")


@dataclass
class DiscreteTrajectory:
    """The optimization variable: state, costate, and relaxed state paths."""

    states: np.ndarray    # (N+1, state_dim); states[N] pinned to the query
    costates: np.ndarray  # (N+1, state_dim); costates[0] is always zero
    relaxed: np.ndarray   # (N+1, state_dim)
    delta: float

    @property
    def num_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def node_times(self) -> np.ndarray:
        return self.delta * np.arange(self.states.shape[0])


@dataclass
class SolveResult:
    value: float
    trajectory: DiscreteTrajectory
    iterations: int
    converged: bool
    change_history: np.ndarray
    seed: int
    wall_time: float


def _evaluate_value(model, obs, trajectory, goal):
    """Objective value g(x0) + sum <p_j, dx_j> - delta * O_j H(x_j, p_j)."""
    x = trajectory.states
    p = trajectory.costates
    delta = trajectory.delta
    t_nodes = trajectory.node_times
    ham = vehicles.eval_hamiltonian(model, x[1:], p[1:])
    if obs is not None and obs.balls:
        od = obs.spatial_dim
        # obstacle motion runs in physical time T - t_eq
        t_phys = t_nodes[-1] - t_nodes[1:]
        factor = obstacle_geometry.smooth_indicator(obs, x[1:, :od], t_phys)
    else:
        factor = 1.0
    g0 = float(np.linalg.norm(x[0] - goal))
    inner = float(np.sum(p[1:] * (x[1:] - x[:-1])))
    return g0 + inner - delta * float(np.sum(factor * ham))


def solve(model, obs, query, goal, horizon, cfg=None):
    """Run the splitting iteration for u at (query, horizon).

    obs may be None or an empty ObstacleSet for free space.  Returns a
    SolveResult; converged is False if max_iters is exhausted first.
    """
    if cfg is None:
        cfg = SolverConfig()
    query = np.asarray(query, dtype=float)
    goal = np.asarray(goal, dtype=float)
    d = model.state_dim
    if query.shape != (d,) or goal.shape != (d,):
        raise ValueError(
            f"query/goal must have {d} components for a {model.kind}"
        )
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    n = max(1, int(round(horizon / cfg.delta)))
    delta, sigma, tau, kappa = cfg.delta, cfg.sigma, cfg.tau, cfg.kappa
    sd = model.spatial_dim
    n_ang = len(model.angular_indices)
    has_obs = obs is not None and len(obs.balls) > 0
    od = obs.spatial_dim if has_obs else sd
    t_nodes = delta * np.arange(n + 1)
    # obstacle motion is specified in physical time; node j sits at
    # physical time T - t_j on the time-reversed path
    t_obs = t_nodes[n] - t_nodes[1:]

    rng = np.random.default_rng(cfg.seed)
    lo = np.minimum(query, goal) - 1.0
    hi = np.maximum(query, goal) + 1.0
    x = rng.uniform(lo, hi, size=(n + 1, d))
    p = rng.uniform(-1.0, 1.0, size=(n + 1, d))
    x[n] = query
    p[0] = 0.0
    z = x.copy()

    start_time = time.perf_counter()
    history = []
    converged = False
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        if has_obs:
            factor = obstacle_geometry.smooth_indicator(obs, x[1:, :od], t_obs)
        else:
            factor = np.ones(n)
        beta = p[1:] + sigma * (z[1:] - z[:-1])
        ctx = vehicles.ProxContext(delta, sigma, tau, obstacle_factor=factor)
        p_new = np.empty_like(p)
        p_new[0] = 0.0
        p_new[1:] = vehicles.prox_p(model, x[1:], beta, ctx)

        x_new = np.empty_like(x)
        x_new[0] = vehicles.update_x0(model, x[0], p_new[1], goal, tau)
        if n > 1:
            ctx_int = vehicles.ProxContext(
                delta, sigma, tau, obstacle_factor=factor[: n - 1]
            )
            x_new[1:n, :sd] = vehicles.update_x_spatial(
                model, x[1:n], p_new[1:n], p_new[2:], ctx_int,
                obs if has_obs else None, t_obs[: n - 1],
                eta=cfg.eta, n_gd=cfg.n_gd,
            )
            x_new[1:n, sd:] = vehicles.update_x_angular(
                model, x[1:n], p_new[1:n], p_new[2:], ctx_int,
                eta=cfg.eta, n_gd=cfg.n_gd,
            )
        x_new[n] = query

        z = x_new + kappa * (x_new - x)
        change = max(
            float(np.max(np.abs(x_new - x))), float(np.max(np.abs(p_new - p)))
        )
        history.append(change)
        x, p = x_new, p_new
        if k % 100 == 0 and not (np.isfinite(x).all() and np.isfinite(p).all()):
            raise SolverDivergedError(f"non-finite iterate at iteration {k}")
        if change < cfg.tol:
            converged = True
            break

    trajectory = DiscreteTrajectory(states=x, costates=p, relaxed=z, delta=delta)
    value = _evaluate_value(model, obs if has_obs else None, trajectory, goal)
    return SolveResult(
        value=value,
        trajectory=trajectory,
        iterations=iterations,
        converged=converged,
        change_history=np.asarray(history),
        seed=cfg.seed,
        wall_time=time.perf_counter() - start_time,
    )


def find_min_horizon(model, obs, query, goal, cfg, t_lo, t_hi, reach_tol,
                     mode="bisection"):
    """Smallest horizon on the delta-grid where solve(...).value <= reach_tol.

    Bisection assumes the predicate is monotone in the horizon, which holds
    for free space and stationary obstacles; pass mode="scan" for a linear
    sweep when obstacles move.  Raises NotReachableError if the predicate is
    false at t_hi.
    """
    if cfg is None:
        cfg = SolverConfig()
    if t_lo >= t_hi:
        raise ValueError("t_lo must be below t_hi")

    def reached(steps):
        return solve(model, obs, query, goal, steps * cfg.delta, cfg).value <= reach_tol

    n_lo = max(1, int(round(t_lo / cfg.delta)))
    n_hi = max(n_lo + 1, int(round(t_hi / cfg.delta)))
    if reached(n_lo):
        return n_lo * cfg.delta
    if mode == "scan":
        for n in range(n_lo + 1, n_hi + 1):
            if reached(n):
                return n * cfg.delta
        raise NotReachableError(
            f"goal not reachable within horizon {n_hi * cfg.delta}"
        )
    if not reached(n_hi):
        raise NotReachableError(
            f"goal not reachable within horizon {n_hi * cfg.delta}"
        )
    lo, hi = n_lo, n_hi  # predicate false at lo, true at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return hi * cfg.delta


def extract_physical_path(result):
    """Re-index the converged path into physical time.

    Physical time 0 is the pinned query (path index N); physical time T is
    the free endpoint near the goal (index 0).  Returns (times, states) with
    uniform spacing delta; no numeric mutation of the states.
    """
    if not result.converged:
        raise ValueError("cannot extract a physical path from a non-converged run")
    states = result.trajectory.states
    times = result.trajectory.delta * np.arange(states.shape[0])
    return times, states[::-1].copy()
