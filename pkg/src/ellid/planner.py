"""Receding-horizon planner for a point mass among ellipsoidal obstacles.

The vehicle is a double integrator driven by planar forces. Obstacle
avoidance enters as soft ellipsoidal keep-out constraints: the margin
c must exceed 1, relaxed as c + psi * s > 1 with penalized slack
s >= 0. Eliminating the slack analytically (optimal s is
max(0, (1 - c) / psi)) turns the problem into an exact-penalty
objective over the control sequence alone; states follow from a
single-shooting rollout so the discrete dynamics hold by construction.
The bounded, smooth objective is minimized with L-BFGS-B, which also
enforces the control box exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from .geometry import StandardEllipse, rotation
from .tracking import Track, predict_ellipse

_VEL_BOUND_WEIGHT = 1e3  # quadratic penalty on speed-limit violation


class SolverStatus(str, Enum):
    CONVERGED = "converged"
    ITER_LIMIT = "iter_limit"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class VehicleState:
    px: float
    py: float
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        for name in ("px", "py", "vx", "vy"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("vehicle state must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.vx, self.vy])

    @classmethod
    def from_array(cls, a) -> "VehicleState":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(a[0], a[1], a[2], a[3])

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])


def _default_q() -> np.ndarray:
    return np.eye(4)


def _default_p() -> np.ndarray:
    return np.diag([0.1, 0.1])


@dataclass(frozen=True, eq=False)
class MpcConfig:
    horizon: int = 20
    dt: float = 0.05
    mass: float = 1.0
    q_weights: np.ndarray = field(default_factory=_default_q)   # state tracking
    p_weights: np.ndarray = field(default_factory=_default_p)   # control effort
    slack_weight: float = 1.0    # per-obstacle slack penalty (S diagonal)
    psi: float = 0.15            # softness of the collision constraint
    u_min: float = -20.0
    u_max: float = 20.0
    v_max: float = 20.0          # symmetric speed bound per axis
    vehicle_radius: float = 0.3  # additive semi-axis enlargement
    safety_margin: float = 0.0   # extra enlargement used for planning only
    collision_substeps: int = 1  # margin checks per dynamics step
    solver_iters: int = 50
    solver_tol: float = 1e-6

    def __post_init__(self):
        if self.horizon < 1 or self.dt <= 0 or self.mass <= 0 or self.psi <= 0:
            raise ValueError("horizon, dt, mass, and psi must be positive")
        if self.u_min >= self.u_max:
            raise ValueError("control box is contradictory (u_min >= u_max)")
        if self.collision_substeps < 1:
            raise ValueError("collision_substeps must be at least 1")


@dataclass(frozen=True, eq=False)
class MpcSolution:
    states: np.ndarray        # (N+1, 4)
    controls: np.ndarray      # (N, 2)
    slacks: np.ndarray        # (N, n_obstacles)
    cost_breakdown: tuple[float, float, float]  # tracking, control, slack
    solver_status: SolverStatus
    iterations: int

    @property
    def cost(self) -> float:
        return float(sum(self.cost_breakdown))


def step_dynamics(xi: VehicleState, u, dt: float, mass: float) -> VehicleState:
    """One forward-Euler step: position first, then velocity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float).reshape(2)
    return VehicleState(
        xi.px + xi.vx * dt,
        xi.py + xi.vy * dt,
        xi.vx + u[0] / mass * dt,
        xi.vy + u[1] / mass * dt,
    )


def collision_margin(xi: VehicleState, e: StandardEllipse,
                     vehicle_radius: float) -> float:
    """Quadratic clearance margin; values above 1 mean no contact.

    The ellipse semi-axes are enlarged additively by the vehicle radius,
    so the level set c = 1 is the contact surface of the vehicle disc.
    """
    delta = xi.position - e.xc
    m = _enlarged_shape_matrix(e, vehicle_radius)
    return float(delta @ m @ delta)


def _enlarged_shape_matrix(e: StandardEllipse, radius: float) -> np.ndarray:
    r = rotation(e.theta)
    return r @ np.diag([(e.r2 + radius) ** -2, (e.r1 + radius) ** -2]) @ r.T


def _rollout(u: np.ndarray, x0: np.ndarray, dt: float, mass: float) -> np.ndarray:
    n = len(u)
    states = np.empty((n + 1, 4))
    states[0] = x0
    for i in range(n):
        s = states[i]
        states[i + 1, 0] = s[0] + s[2] * dt
        states[i + 1, 1] = s[1] + s[3] * dt
        states[i + 1, 2] = s[2] + u[i, 0] / mass * dt
        states[i + 1, 3] = s[3] + u[i, 1] / mass * dt
    return states


def solve_mpc(xi_init: VehicleState, goal, obstacles: list[Track],
              cfg: MpcConfig = MpcConfig(), u_init: np.ndarray | None = None
              ) -> MpcSolution:
    """Plan an N-step force sequence toward the goal around predicted obstacles.

    Obstacles are propagated per step under their constant-velocity
    tracks. The returned trajectory satisfies the discretized dynamics
    exactly, keeps controls inside the box, and carries the optimal
    slack certificate for every (step, obstacle) pair.
    """
    n = cfg.horizon
    sub = cfg.collision_substeps
    goal = np.asarray(goal, dtype=float).reshape(2)
    x_goal = np.array([goal[0], goal[1], 0.0, 0.0])
    x0 = xi_init.as_array()

    # Obstacle geometry under the constant-velocity prediction, sampled at
    # substep times so fast passes cannot tunnel between the knots.
    centers = np.zeros((n * sub, len(obstacles), 2))
    mats = np.zeros((n * sub, len(obstacles), 2, 2))
    enlarge = cfg.vehicle_radius + cfg.safety_margin
    for j, trk in enumerate(obstacles):
        for k in range(n * sub):
            e = predict_ellipse(trk, (k + 1) * cfg.dt / sub)
            centers[k, j] = e.xc
            mats[k, j] = _enlarged_shape_matrix(e, enlarge)

    q = np.asarray(cfg.q_weights, dtype=float)
    p = np.asarray(cfg.p_weights, dtype=float)
    s_weight = cfg.slack_weight
    psi = cfg.psi
    f_mat = np.array([[1.0, 0, cfg.dt, 0],
                      [0, 1.0, 0, cfg.dt],
                      [0, 0, 1.0, 0],
                      [0, 0, 0, 1.0]])

    def objective(u_flat: np.ndarray) -> tuple[float, np.ndarray]:
        u = u_flat.reshape(n, 2)
        states = _rollout(u, x0, cfg.dt, cfg.mass)
        cost = 0.0
        grad_x = np.zeros((n + 1, 4))
        for i in range(1, n + 1):
            dx = states[i] - x_goal
            cost += dx @ q @ dx
            grad_x[i] += 2.0 * q @ dx
            if len(obstacles):
                for s in range(1, sub + 1):
                    frac = s / sub
                    pos = (1.0 - frac) * states[i - 1, :2] + frac * states[i, :2]
                    k = (i - 1) * sub + s - 1
                    d = pos - centers[k]
                    c = np.einsum("jd,jde,je->j", d, mats[k], d)
                    slack = np.maximum(0.0, (1.0 - c) / psi)
                    cost += s_weight / sub * float(slack @ slack)
                    coef = -2.0 * s_weight / sub * slack / psi
                    dpen = 2.0 * np.einsum("j,jde,je->d", coef, mats[k], d)
                    grad_x[i - 1, :2] += (1.0 - frac) * dpen
                    grad_x[i, :2] += frac * dpen
            over = np.abs(states[i, 2:]) - cfg.v_max
            mask = over > 0
            if mask.any():
                cost += _VEL_BOUND_WEIGHT * float((over[mask] ** 2).sum())
                grad_x[i, 2:][mask] += (2.0 * _VEL_BOUND_WEIGHT * over[mask]
                                        * np.sign(states[i, 2:][mask]))
        cost += float(np.einsum("id,de,ie->", u, p, u))
        grad_u = 2.0 * u @ p
        # Adjoint sweep: fold downstream state gradients back to controls.
        lam = grad_x[n]
        g = np.array([[0.0, 0.0], [0.0, 0.0],
                      [cfg.dt / cfg.mass, 0.0], [0.0, cfg.dt / cfg.mass]])
        for i in range(n - 1, -1, -1):
            grad_u[i] += g.T @ lam
            lam = grad_x[i] + f_mat.T @ lam
        return cost, grad_u.ravel()

    if u_init is None:
        u0 = np.zeros((n, 2))
    else:
        u0 = np.clip(np.asarray(u_init, dtype=float).reshape(n, 2),
                     cfg.u_min, cfg.u_max)

    res = minimize(objective, u0.ravel(), jac=True, method="L-BFGS-B",
                   bounds=[(cfg.u_min, cfg.u_max)] * (2 * n),
                   options={"maxiter": cfg.solver_iters,
                            "ftol": 1e-14,
                            "gtol": cfg.solver_tol})
    u = res.x.reshape(n, 2)
    states = _rollout(u, x0, cfg.dt, cfg.mass)

    slacks = np.zeros((n, len(obstacles)))
    j_coll = 0.0
    for i in range(1, n + 1):
        if not len(obstacles):
            break
        k = i * sub - 1  # knot-time entry of the substep tables
        d = states[i, :2] - centers[k]
        c = np.einsum("jd,jde,je->j", d, mats[k], d)
        slacks[i - 1] = np.maximum(0.0, (1.0 - c) / psi)
        j_coll += s_weight * float(slacks[i - 1] @ slacks[i - 1])
    dx = states[1:] - x_goal
    j_track = float(np.einsum("id,de,ie->", dx, q, dx))
    j_ctrl = float(np.einsum("id,de,ie->", u, p, u))

    status = SolverStatus.CONVERGED if res.success else SolverStatus.ITER_LIMIT
    return MpcSolution(states, u, slacks, (j_track, j_ctrl, j_coll),
                       status, int(res.nit))


def warm_start(previous: MpcSolution | None, horizon: int) -> np.ndarray | None:
    """Shift the previous control plan one step, repeating the last input."""
    if previous is None:
        return None
    u = previous.controls
    if len(u) != horizon:
        return None
    return np.vstack([u[1:], u[-1:]])
