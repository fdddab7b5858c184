"""Dynamic window approach for a unicycle robot among disc obstacles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ROLLOUTS = ("window", "ramp")


@dataclass(frozen=True)
class DwaConfig:
    v_max: float = 1.0
    omega_max: float = 1.5
    accel_max: float = 1.0
    alpha_max: float = 3.0
    radius: float = 0.3
    w_heading: float = 1.0
    w_clearance: float = 0.4
    w_speed: float = 0.8
    clearance_cap: float = 0.5
    nv: int = 6
    nw: int = 13
    horizon: float = 2.0
    sim_dt: float = 0.25
    rollout: str = "ramp"

    @classmethod
    def from_params(cls, robot, params) -> "DwaConfig":
        return cls(robot.v_max, robot.omega_max, robot.accel_max, robot.alpha_max, robot.radius,
                   params.dwa_w_heading, params.dwa_w_clearance, params.dwa_w_speed,
                   params.dwa_clearance_cap, params.dwa_nv, params.dwa_nw,
                   params.dwa_horizon, params.dwa_sim_dt, params.dwa_rollout)


@dataclass(frozen=True)
class DwaCommand:
    v: float
    omega: float
    frozen: bool = False
    score: float = float("nan")


def arc_points(x, y, theta, v, omega, times):
    """Exact unicycle positions for constant commands; broadcasts over samples."""
    v = np.asarray(v, dtype=float)[..., None]
    w = np.asarray(omega, dtype=float)[..., None]
    t = np.asarray(times, dtype=float)
    th = theta + w * t
    straight = np.abs(w) < 1e-9
    w_safe = np.where(straight, 1.0, w)
    px = np.where(straight, x + v * np.cos(theta) * t, x + v / w_safe * (np.sin(th) - math.sin(theta)))
    py = np.where(straight, y + v * np.sin(theta) * t, y - v / w_safe * (np.cos(th) - math.cos(theta)))
    return px, py, th


def ramp_points(x, y, theta, v0, w0, v_target, w_target, accel, alpha, times):
    """Positions while speeds ramp from ``(v0, w0)`` to each target under the limits.

    Integrated with the step sizes of ``times``, which must start after 0 and
    increase.
    """
    t = np.asarray(times, dtype=float)
    vt = np.asarray(v_target, dtype=float)[..., None]
    wt = np.asarray(w_target, dtype=float)[..., None]
    v = v0 + np.clip(vt - v0, -accel * t, accel * t)
    w = w0 + np.clip(wt - w0, -alpha * t, alpha * t)
    dt = np.diff(t, prepend=0.0)
    th = theta + np.cumsum(w * dt, axis=-1)
    px = x + np.cumsum(v * np.cos(th) * dt, axis=-1)
    py = y + np.cumsum(v * np.sin(th) * dt, axis=-1)
    return px, py, th


def dynamic_window(v, omega, cfg: DwaConfig, dt: float):
    return (max(0.0, v - cfg.accel_max * dt), min(cfg.v_max, v + cfg.accel_max * dt),
            max(-cfg.omega_max, omega - cfg.alpha_max * dt), min(cfg.omega_max, omega + cfg.alpha_max * dt))


def _clearance(px, py, obstacles, obstacle_radius, cfg: DwaConfig, halfwidth):
    """Signed clearance per rollout point, (S, T).

    ``obstacles`` is ``(M, 2)`` for fixed points or ``(T, M, 2)`` for points
    that move along the rollout times.
    """
    clr = np.full(np.shape(px), np.inf)
    if obstacles.shape[-2]:
        dx = px[..., None] - obstacles[..., 0]
        dy = py[..., None] - obstacles[..., 1]
        clr = np.min(np.hypot(dx, dy), axis=-1) - (cfg.radius + obstacle_radius)
    if halfwidth is not None:
        clr = np.minimum(clr, halfwidth - cfg.radius - np.abs(py))
    return clr


def evaluate(pose, v_samples, w_samples, target, obstacles, obstacle_radius, cfg: DwaConfig,
             halfwidth=None, obstacle_velocities=None, current=(0.0, 0.0)):
    """Score every (v, omega) sample; returns (scores, admissible).

    With ``obstacle_velocities`` the obstacles are extrapolated at constant
    velocity over the rollout; otherwise they are held fixed. ``current`` is
    the robot's present ``(v, omega)``, used by ramped rollouts.
    """
    x, y, theta = pose
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    vel = None if obstacle_velocities is None else np.asarray(obstacle_velocities, dtype=float).reshape(-1, 2)
    if len(obstacles):
        reach = 2 * cfg.v_max * cfg.horizon + cfg.radius + obstacle_radius + cfg.clearance_cap
        near = np.hypot(obstacles[:, 0] - x, obstacles[:, 1] - y) <= reach
        obstacles = obstacles[near]
        vel = None if vel is None else vel[near]
    if cfg.rollout == "ramp":
        step = cfg.sim_dt / 5
        times = np.arange(1, int(round(cfg.horizon / step)) + 1) * step
        px, py, th = ramp_points(x, y, theta, current[0], current[1], v_samples, w_samples,
                                 cfg.accel_max, cfg.alpha_max, times)
    else:
        times = np.arange(1, int(round(cfg.horizon / cfg.sim_dt)) + 1) * cfg.sim_dt
        px, py, th = arc_points(x, y, theta, v_samples, w_samples, times)

    moving = obstacles if vel is None else obstacles[None] + times[:, None, None] * vel[None]
    # contact the robot would suffer anyway by standing still is not its fault
    stand = _clearance(np.full(times.shape, float(x)), np.full(times.shape, float(y)), moving,
                       obstacle_radius, cfg, halfwidth)
    per_step = _clearance(px, py, moving, obstacle_radius, cfg, halfwidth)
    clr = per_step.min(axis=-1)
    admissible = ~(per_step < np.minimum(0.0, stand) - 1e-12).any(axis=-1)

    tx, ty = target
    to_target = np.arctan2(ty - py[:, -1], tx - px[:, -1])
    err = np.abs((to_target - th[:, -1] + np.pi) % (2 * np.pi) - np.pi)
    reached = np.hypot(tx - px[:, -1], ty - py[:, -1]) < 1e-6
    heading = np.where(reached, 1.0, 1.0 - err / np.pi)
    # negative clearance is penetration depth; shallower contact scores better
    clearance = np.clip(clr, -cfg.clearance_cap, cfg.clearance_cap) / cfg.clearance_cap
    # speed only pays where the rollout keeps its distance
    speed = np.asarray(v_samples) / cfg.v_max * np.clip(clearance, 0.0, 1.0)
    scores = cfg.w_heading * heading + cfg.w_clearance * clearance + cfg.w_speed * speed
    return scores, admissible


def sample_grid(v, omega, cfg: DwaConfig, dt: float, nv: int | None = None, nw: int | None = None):
    """Flattened ``(V, W)`` samples: the dynamic window, or every target speed for ramped rollouts."""
    if cfg.rollout == "ramp":
        v_lo, v_hi, w_lo, w_hi = 0.0, cfg.v_max, -cfg.omega_max, cfg.omega_max
    else:
        v_lo, v_hi, w_lo, w_hi = dynamic_window(v, omega, cfg, dt)
    V, W = np.meshgrid(np.linspace(v_lo, v_hi, nv or cfg.nv), np.linspace(w_lo, w_hi, nw or cfg.nw),
                       indexing="ij")
    return V.ravel(), W.ravel()


def dwa_plan(pose, v, omega, target, obstacles, obstacle_radius: float, cfg: DwaConfig, dt: float,
             halfwidth: float | None = None, nv: int | None = None, nw: int | None = None,
             obstacle_velocities=None) -> DwaCommand:
    """Best admissible command.

    A sample is admissible when its rollout never touches an obstacle or
    corridor wall, counting contact only where it is worse than what a robot
    standing still would suffer at the same time. With ``rollout="ramp"`` the
    samples are target speeds reached under the acceleration limits and the
    command is the first control step toward the best one. No admissible
    sample returns a stop with ``frozen`` set.
    """
    if cfg.rollout not in ROLLOUTS:
        raise ValueError(f"rollout must be one of {ROLLOUTS}")
    V, W = sample_grid(v, omega, cfg, dt, nv, nw)
    scores, ok = evaluate(pose, V, W, target, obstacles, obstacle_radius, cfg, halfwidth,
                          obstacle_velocities, (v, omega))
    if not ok.any():
        return DwaCommand(0.0, 0.0, True)
    scores = np.where(ok, scores, -np.inf)
    k = int(np.argmax(scores))
    cmd_v, cmd_w = float(V[k]), float(W[k])
    if cfg.rollout == "ramp":
        cmd_v = v + float(np.clip(cmd_v - v, -cfg.accel_max * dt, cfg.accel_max * dt))
        cmd_w = omega + float(np.clip(cmd_w - omega, -cfg.alpha_max * dt, cfg.alpha_max * dt))
    return DwaCommand(cmd_v, cmd_w, False, float(scores[k]))
