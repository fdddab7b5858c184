"""Potential freezing zones and deviation angles.

All positions are world-frame. A candidate heading is scored by the point the
robot would reach after ``t_h`` seconds at its preferred velocity rotated by
``phi``; the search picks the feasible rotation whose point lies closest to
the goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .cohesion import CohesionBreakdown
from .geometry import EPS, Hull, contains_points, convex_hull, hull_distance, rotate
from .grouping import STATIC_SPEED, Group

Feasible = Callable[[np.ndarray], np.ndarray]


class PlannerKind(str, Enum):
    DWA = "dwa"
    FROZONE = "frozone"
    COMET = "comet"


@dataclass
class RobotState:
    position: tuple[float, float]
    heading: float
    goal: tuple[float, float]
    v: float = 0.0  # forward speed command currently applied
    omega: float = 0.0
    v_max: float = 1.0
    omega_max: float = 1.5
    radius: float = 0.3

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.v * math.cos(self.heading), self.v * math.sin(self.heading))

    def preferred_velocity(self) -> np.ndarray:
        """Full-speed velocity pointing at the goal."""
        d = np.subtract(self.goal, self.position)
        n = math.hypot(d[0], d[1])
        if n == 0.0:
            return np.array([self.v_max * math.cos(self.heading), self.v_max * math.sin(self.heading)])
        return self.v_max * d / n


@dataclass(frozen=True)
class Pfz:
    hull: Hull
    group_id: int
    cohesion: CohesionBreakdown = field(default_factory=CohesionBreakdown)
    margin: float = 0.0  # inflation radius
    size: int = 1

    def contains(self, points) -> np.ndarray:
        return contains_points(self.hull, points, self.margin + EPS)

    def distance(self, point) -> float:
        return max(float(hull_distance(self.hull, [point])[0]) - self.margin, 0.0)


class Deviation(NamedTuple):
    phi: float | None  # None: no feasible rotation, the planner freezes
    phase: int = 1

    @property
    def frozen(self) -> bool:
        return self.phi is None


def _angle_between(a, b) -> float:
    na, nb = math.hypot(*a), math.hypot(*b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = (a[0] * b[0] + a[1] * b[1]) / (na * nb)
    return math.acos(max(-1.0, min(1.0, c)))


def potentially_freezing(groups: Sequence[Group], positions: Mapping[int, Sequence[float]], robot: RobotState,
                         t_h: float, sense_radius: float, alpha_pf: float,
                         static_speed: float = STATIC_SPEED) -> list[Group]:
    """Groups ahead of the robot that will close in on it within ``t_h``.

    A group qualifies when its predicted centroid is in the robot's front
    half-plane within ``sense_radius``, and it is either static or walking
    within ``alpha_pf`` of the direction toward the robot.
    """
    if not t_h > 0:
        raise ValueError("t_h must be positive")
    c, s = math.cos(robot.heading), math.sin(robot.heading)
    rx, ry = robot.position
    out = []
    for g in groups:
        pts = np.array([positions[m] for m in g.members], dtype=float)
        centroid = pts.mean(axis=0)
        vx, vy = g.avg_velocity
        px, py = centroid[0] + vx * t_h - rx, centroid[1] + vy * t_h - ry
        if c * px + s * py <= 0.0 or math.hypot(px, py) > sense_radius:
            continue
        if math.hypot(vx, vy) < static_speed:
            out.append(g)
            continue
        toward_robot = (rx - centroid[0], ry - centroid[1])
        if _angle_between((vx, vy), toward_robot) < alpha_pf:
            out.append(g)
    return out


def predict_group_positions(group: Group, positions: Mapping[int, Sequence[float]], t_h: float) -> np.ndarray:
    """Every member advanced by the group's mean walking vector."""
    pts = np.array([positions[m] for m in group.members], dtype=float).reshape(-1, 2)
    return pts + np.asarray(group.avg_velocity) * t_h


def build_pfz(predicted, group: Group | int, robot_radius: float,
              cohesion: CohesionBreakdown | None = None) -> Pfz:
    gid = group if isinstance(group, int) else group.id
    size = 1 if isinstance(group, int) else group.size
    return Pfz(convex_hull(np.asarray(predicted).reshape(-1, 2)), gid,
               cohesion or CohesionBreakdown(), robot_radius, size)


def frozone_pfz(positions, velocities, t_h: float, robot_radius: float) -> Pfz:
    """Single zone over every potentially freezing pedestrian, each moved by its own velocity."""
    p = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(p) == 0:
        raise ValueError("frozone_pfz needs at least one pedestrian")
    v = np.asarray(velocities, dtype=float).reshape(-1, 2)
    return Pfz(convex_hull(p + v * t_h), -1, CohesionBreakdown(), robot_radius, len(p))


def candidate_angles(delta_phi: float) -> np.ndarray:
    k = int(math.floor(math.pi / delta_phi + 1e-9))
    steps = np.arange(-k, k + 1)
    return steps * delta_phi


def _path_points(origin, offsets, path_samples: int) -> np.ndarray:
    """Points at fractions ``k/K`` of each offset, shape ``(K, N, 2)``; the last slice is the endpoint."""
    frac = np.arange(1, path_samples + 1) / path_samples
    return np.asarray(origin, dtype=float) + frac[:, None, None] * np.asarray(offsets, dtype=float)[None]


def path_feasible(feasible: Feasible, origin, offsets, path_samples: int = 1) -> np.ndarray:
    """A candidate passes when every sampled point of its straight segment does."""
    pts = _path_points(origin, offsets, path_samples)
    k, n = pts.shape[:2]
    return np.asarray(feasible(pts.reshape(-1, 2)), dtype=bool).reshape(k, n).all(axis=0)


def deviation_search(robot_position, v_rob, goal, feasible: Feasible, t_h: float,
                     delta_phi: float, path_samples: int = 1) -> float | None:
    """Smallest-goal-distance feasible rotation of ``v_rob`` on a ``delta_phi`` grid.

    ``feasible`` maps an ``(M, 2)`` array of world points to a boolean mask.
    With ``path_samples > 1`` the straight segment to each candidate point is
    checked at that many evenly spaced points instead of the endpoint alone.
    Ties go to the smaller rotation, then to the positive one. Returns None
    when no candidate is feasible.
    """
    v = np.asarray(v_rob, dtype=float)
    if math.hypot(v[0], v[1]) == 0.0:
        raise ValueError("robot velocity is zero; no direction to rotate")
    if not delta_phi > 0:
        raise ValueError("delta_phi must be positive")
    if path_samples < 1:
        raise ValueError("path_samples must be at least 1")
    phis = candidate_angles(delta_phi)
    offsets = np.column_stack((np.cos(phis) * v[0] - np.sin(phis) * v[1],
                               np.sin(phis) * v[0] + np.cos(phis) * v[1])) * t_h
    points = np.asarray(robot_position, dtype=float) + offsets
    ok = path_feasible(feasible, robot_position, offsets, path_samples)
    if not ok.any():
        return None
    g = np.asarray(goal, dtype=float)
    dist = np.hypot(points[:, 0] - g[0], points[:, 1] - g[1])
    idx = np.flatnonzero(ok)
    order = np.lexsort((-phis[idx], np.abs(phis[idx]), np.round(dist[idx], 9)))
    return float(phis[idx[order[0]]])


def outside_all(pfzs: Sequence[Pfz], bounds: Feasible | None = None) -> Feasible:
    def feasible(points):
        mask = np.ones(len(points), dtype=bool) if bounds is None else bounds(points)
        for z in pfzs:
            mask &= ~z.contains(points)
        return mask
    return feasible


def lowest_cohesion(pfzs: Sequence[Pfz], robot_position) -> Pfz | None:
    """Zone of the least cohesive multi-member group; ties go to the nearest."""
    groups = [z for z in pfzs if z.size >= 2]
    if not groups:
        return None
    return min(groups, key=lambda z: (z.cohesion.c_tot, z.distance(robot_position), z.group_id))


def comet_deviation(robot: RobotState, pfzs: Sequence[Pfz], t_h: float, delta_phi: float,
                    bounds: Feasible | None = None, v_rob=None, path_samples: int = 1) -> Deviation:
    """Avoid every group zone; failing that, pass through the least cohesive group.

    Phase 2 admits points of the least cohesive zone not shared with any other
    zone, as well as points outside every zone.
    """
    v = robot.preferred_velocity() if v_rob is None else np.asarray(v_rob, dtype=float)
    if not pfzs:
        return Deviation(0.0, 0)
    phi = deviation_search(robot.position, v, robot.goal, outside_all(pfzs, bounds), t_h, delta_phi, path_samples)
    if phi is not None:
        return Deviation(phi, 1)
    zmin = lowest_cohesion(pfzs, robot.position)
    if zmin is None:
        return Deviation(None, 2)
    others = [z for z in pfzs if z is not zmin]
    clear = outside_all(pfzs, bounds)

    def region(points):
        mask = zmin.contains(points)
        for z in others:
            mask &= ~z.contains(points)
        if bounds is not None:
            mask &= bounds(points)
        return mask | clear(points)

    return Deviation(deviation_search(robot.position, v, robot.goal, region, t_h, delta_phi, path_samples), 2)


def bearing_from(v_rob, rel) -> float:
    """Signed angle from direction ``v_rob`` to vector ``rel``."""
    return math.atan2(v_rob[0] * rel[1] - v_rob[1] * rel[0], v_rob[0] * rel[0] + v_rob[1] * rel[1])


def frozone_deviation(robot: RobotState, pfz_froz: Pfz, nearest_pf, t_h: float, delta_phi: float,
                      bounds: Feasible | None = None, v_rob=None, path_samples: int = 1) -> Deviation:
    """Smaller-magnitude of the boundary search and the nearest-pedestrian bearing.

    The bearing candidate is admitted only when the rotated point is outside
    the zone, like the search candidates.
    """
    v = robot.preferred_velocity() if v_rob is None else np.asarray(v_rob, dtype=float)
    feasible = outside_all([pfz_froz], bounds)
    phi1 = deviation_search(robot.position, v, robot.goal, feasible, t_h, delta_phi, path_samples)
    phi2 = None
    if nearest_pf is not None:
        rel = np.subtract(nearest_pf, robot.position)
        cand = bearing_from(v, rel)
        if cand != 0.0:
            if path_feasible(feasible, robot.position, rotate(v * t_h, cand), path_samples)[0]:
                phi2 = cand
    if phi1 is None and phi2 is None:
        return Deviation(None, 1)
    if phi2 is None or (phi1 is not None and abs(phi1) <= abs(phi2)):
        return Deviation(phi1, 1)
    return Deviation(phi2, 2)
