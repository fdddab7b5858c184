"""Benchmark metrics over logged robot trajectories.

Step logs are arrays whose columns are ``t, x, y, vx, vy, phi, frozen``;
row 0 is the start pose.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def metric_avg_deviation(steps: np.ndarray, start, goal) -> float:
    """Mean unsigned angle (degrees) between robot velocity and the start-goal line.

    Steps where the robot is not moving carry no direction and are skipped; a
    robot that never moved scores 0.
    """
    steps = np.asarray(steps, dtype=float)
    v = steps[:, 3:5]
    moving = np.hypot(v[:, 0], v[:, 1]) > 0.0
    if not moving.any():
        return 0.0
    line = np.subtract(goal, start)
    ref = math.atan2(line[1], line[0])
    ang = np.arctan2(v[moving, 1], v[moving, 0]) - ref
    ang = np.abs((ang + np.pi) % (2 * np.pi) - np.pi)
    return float(np.degrees(ang).mean())


def path_length(steps: np.ndarray) -> float:
    xy = np.asarray(steps, dtype=float)[:, 1:3]
    if len(xy) < 2:
        return 0.0
    d = np.diff(xy, axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def metric_normalized_path_length(steps: np.ndarray, start, goal) -> float:
    return path_length(steps) / math.dist(start, goal)


def freeze_detected(steps: np.ndarray, v_freeze: float, t_freeze: float, dt: float) -> bool:
    """True when speed stays below ``v_freeze`` for ``t_freeze`` seconds in a row."""
    v = np.asarray(steps, dtype=float)[1:, 3:5]
    slow = np.hypot(v[:, 0], v[:, 1]) < v_freeze
    need = int(math.ceil(t_freeze / dt - 1e-9))
    run = 0
    for s in slow:
        run = run + 1 if s else 0
        if run >= need:
            return True
    return False


def metric_freezing_rate(results: Sequence) -> float:
    if not results:
        raise ValueError("freezing rate needs at least one trial")
    return sum(bool(r.froze) for r in results) / len(results)


def bootstrap_ci(values: Sequence[float], n_boot: int = 2000, level: float = 0.95, seed: int = 0):
    """Percentile bootstrap interval for the mean; (nan, nan) for an empty sample."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return (float("nan"), float("nan"))
    rng = np.random.default_rng(seed)
    means = x[rng.integers(0, x.size, size=(n_boot, x.size))].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return (float(lo), float(hi))
