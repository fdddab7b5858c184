"""Closed-loop simulation of one robot among non-cooperative pedestrians."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import navigation as nav
from ..cohesion import CohesionBreakdown, score_groups
from ..dwa import DwaCommand, DwaConfig, arc_points, dwa_plan
from ..grouping import Group, groups_from_tracks, partition_groups
from ..sensor import measure, observe
from ..tracking import NoiseModel, Track, step_tracks
from ..world import AgentState, FacePose, Scenario, Vec2
from .metrics import freeze_detected, metric_avg_deviation, path_length

STEP_COLUMNS = ("t", "x", "y", "vx", "vy", "phi", "frozen")


@dataclass
class WorldState:
    step: int
    t: float
    ids: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    goal: np.ndarray  # NaN rows: no goal, walk forever
    orient: np.ndarray  # face orientation per pedestrian, NaN when unknown
    genders: tuple
    robot: nav.RobotState
    collisions: int = 0
    tracks: list = field(default_factory=list)

    def agents(self) -> list[AgentState]:
        return [AgentState(int(i), Vec2(*p), Vec2(*v)) for i, p, v in zip(self.ids, self.pos, self.vel)]


def init_state(s: Scenario) -> WorldState:
    n = len(s.agents)
    goal = np.full((n, 2), np.nan)
    orient = np.full((n, 3), np.nan)
    for k, a in enumerate(s.agents):
        if a.goal is not None:
            goal[k] = a.goal
        if a.face is not None:
            orient[k] = a.face.orientation
    r = s.robot
    robot = nav.RobotState(tuple(map(float, r.start)), r.initial_heading, tuple(map(float, r.goal)),
                           0.0, 0.0, r.v_max, r.omega_max, r.radius)
    return WorldState(
        0, 0.0,
        np.array([a.id for a in s.agents], dtype=int),
        np.array([a.position for a in s.agents], dtype=float).reshape(n, 2),
        np.array([a.velocity for a in s.agents], dtype=float).reshape(n, 2),
        goal, orient, tuple(a.gender for a in s.agents), robot,
    )


def _advance_peds(pos, vel, goal, dt):
    pos, vel = pos.copy(), vel.copy()
    has_goal = ~np.isnan(goal[:, 0])
    free = ~has_goal
    pos[free] += vel[free] * dt
    if has_goal.any():
        d = goal[has_goal] - pos[has_goal]
        dist = np.hypot(d[:, 0], d[:, 1])
        speed = np.hypot(vel[has_goal, 0], vel[has_goal, 1])
        stride = np.minimum(speed * dt, dist)
        unit = np.divide(d, dist[:, None], out=np.zeros_like(d), where=dist[:, None] > 0)
        pos[has_goal] += unit * stride[:, None]
        arrived = (dist - stride) <= 1e-12
        new_v = unit * speed[:, None]
        new_v[arrived] = 0.0
        vel[has_goal] = new_v
    return pos, vel


def step_world(s: Scenario, state: WorldState, cmd: tuple[float, float], dt: float | None = None) -> WorldState:
    """Advance pedestrians toward their goals and the robot under ``cmd = (v, omega)``."""
    dt = s.dt if dt is None else dt
    r = state.robot
    v = float(np.clip(cmd[0], 0.0, r.v_max))
    w = float(np.clip(cmd[1], -r.omega_max, r.omega_max))
    px, py, th = arc_points(r.position[0], r.position[1], r.heading, v, w, [dt])
    heading = math.atan2(math.sin(th[-1]), math.cos(th[-1]))
    robot = replace(r, position=(float(px[-1]), float(py[-1])), heading=heading, v=v, omega=w)
    pos, vel = _advance_peds(state.pos, state.vel, state.goal, dt)
    collisions = state.collisions
    if len(pos):
        gap = np.hypot(pos[:, 0] - robot.position[0], pos[:, 1] - robot.position[1])
        collisions += int(np.count_nonzero(gap < r.radius + s.params.ped_radius))
    return WorldState(state.step + 1, state.t + dt, state.ids, pos, vel, state.goal, state.orient,
                      state.genders, robot, collisions, state.tracks)


@dataclass
class TrialResult:
    planner: str
    seed: int
    steps: np.ndarray  # rows of STEP_COLUMNS
    reached_goal: bool
    avg_deviation_deg: float
    froze: bool
    path_length: float
    normalized_path_length: float | None
    collisions: int = 0
    freeze_flags: int = 0

    def summary(self) -> dict:
        return {
            "planner": self.planner, "seed": self.seed, "reached_goal": self.reached_goal,
            "avg_deviation_deg": self.avg_deviation_deg, "froze": self.froze,
            "path_length": self.path_length, "normalized_path_length": self.normalized_path_length,
            "collisions": self.collisions, "freeze_flags": self.freeze_flags, "n_steps": len(self.steps) - 1,
        }


def corridor_bounds(halfwidth: float | None, radius: float):
    if halfwidth is None:
        return None
    limit = halfwidth - radius

    def bounds(points):
        return np.abs(points[:, 1]) <= limit
    return bounds


def perceive(s: Scenario, state: WorldState, noise: NoiseModel, rng: np.random.Generator) -> list:
    """One sensing + tracking update; returns the new track list."""
    r = state.robot
    pose = (r.position[0], r.position[1], r.heading)
    meas = {}
    for det in observe(state.agents(), pose, s.sensor, rng):
        z = measure(det, s.sensor, pose)
        if z is not None:
            meas[det.id] = z
    return step_tracks(state.tracks, meas, s.dt, noise, state.step, s.params.max_age)


def faces_for(state: WorldState, ids) -> dict[int, FacePose]:
    index = {int(i): k for k, i in enumerate(state.ids)}
    out = {}
    for i in ids:
        k = index.get(int(i))
        if k is None or np.isnan(state.orient[k, 0]):
            continue
        out[int(i)] = FacePose((float(state.pos[k, 0]), float(state.pos[k, 1]), 1.6),
                               tuple(float(c) for c in state.orient[k]))
    return out


def genders_for(state: WorldState) -> dict:
    return {int(i): g for i, g in zip(state.ids, state.genders)}


@dataclass
class PlanOutcome:
    command: DwaCommand
    phi: float
    frozen: bool
    reason: str = ""  # "deviation" or "dwa" when frozen
    pfzs: list = field(default_factory=list)
    groups: list = field(default_factory=list)


def _deviation_target(robot: nav.RobotState, phi: float, t_h: float):
    if phi == 0.0:
        return robot.goal
    v = nav.rotate(robot.preferred_velocity() * t_h, phi)[0]
    return (robot.position[0] + v[0], robot.position[1] + v[1])


def zone_margin(s: Scenario, robot: nav.RobotState) -> float:
    """Zone inflation: the robot footprint, plus the pedestrian's in ``footprint`` mode."""
    return robot.radius + (s.params.ped_radius if s.params.pfz_inflation == "footprint" else 0.0)


def comet_zones(s: Scenario, state: WorldState, tracks) -> tuple[list[Group], list[nav.Pfz]]:
    p = s.params
    robot = state.robot
    positions = {t.id: t.position for t in tracks}
    groups = groups_from_tracks(tracks, p)
    pf = nav.potentially_freezing(groups, positions, robot, p.t_h, p.sense_radius, p.alpha_pf, p.static_speed)
    if not pf:
        return groups, []
    members = [m for g in pf for m in g.members]
    scores = score_groups(pf, tracks, p, faces_for(state, members), genders_for(state))
    pfzs = [nav.build_pfz(nav.predict_group_positions(g, positions, p.t_h), g, zone_margin(s, robot),
                         scores[g.id])
            for g in pf]
    return groups, pfzs


def frozone_zone(s: Scenario, state: WorldState, tracks):
    """Frozone's single zone plus the nearest potentially freezing pedestrian."""
    p = s.params
    robot = state.robot
    singles = [Group(t.id, (t.id,), t.velocity) for t in tracks]
    positions = {t.id: t.position for t in tracks}
    pf = nav.potentially_freezing(singles, positions, robot, p.t_h, p.sense_radius, p.alpha_pf, p.static_speed)
    if not pf:
        return None, None
    pts = np.array([positions[g.id] for g in pf])
    vel = np.array([g.avg_velocity for g in pf])
    zone = nav.frozone_pfz(pts, vel, p.t_h, zone_margin(s, robot))
    gap = np.hypot(pts[:, 0] - robot.position[0], pts[:, 1] - robot.position[1])
    return zone, tuple(pts[int(np.argmin(gap))])


def _avoidable(pfzs, robot: nav.RobotState, skip: bool = True) -> list:
    """Zones the robot is not already inside; it cannot steer around those."""
    if not skip:
        return list(pfzs)
    here = np.array([robot.position], dtype=float)
    return [z for z in pfzs if not z.contains(here)[0]]


def plan_step(kind: nav.PlannerKind, s: Scenario, state: WorldState, tracks, dwa_cfg: DwaConfig) -> PlanOutcome:
    p = s.params
    robot = state.robot
    bounds = corridor_bounds(s.corridor_halfwidth, robot.radius)
    phi, pfzs, groups = 0.0, [], []
    if kind is nav.PlannerKind.COMET:
        groups, pfzs = comet_zones(s, state, tracks)
        dev = nav.comet_deviation(robot, _avoidable(pfzs, robot, p.skip_enclosing), p.t_h, p.delta_phi, bounds,
                                  path_samples=p.path_samples)
    elif kind is nav.PlannerKind.FROZONE:
        zone, nearest = frozone_zone(s, state, tracks)
        pfzs = [zone] if zone is not None else []
        dev = nav.Deviation(0.0, 0) if not _avoidable(pfzs, robot, p.skip_enclosing) else nav.frozone_deviation(
            robot, zone, nearest, p.t_h, p.delta_phi, bounds, path_samples=p.path_samples)
    else:
        dev = nav.Deviation(0.0, 0)

    if dev.frozen:
        return PlanOutcome(DwaCommand(0.0, 0.0, True), 0.0, True, "deviation", pfzs, groups)
    phi = dev.phi
    target = _deviation_target(robot, phi, p.t_h)
    obstacles = np.array([t.position for t in tracks], dtype=float).reshape(-1, 2)
    obstacle_v = None
    if p.dwa_predict_obstacles:
        obstacle_v = np.array([t.velocity for t in tracks], dtype=float).reshape(-1, 2)
    pose = (robot.position[0], robot.position[1], robot.heading)
    cmd = dwa_plan(pose, robot.v, robot.omega, target, obstacles, p.ped_radius, dwa_cfg, s.dt,
                   s.corridor_halfwidth, obstacle_velocities=obstacle_v)
    return PlanOutcome(cmd, phi, cmd.frozen, "dwa" if cmd.frozen else "", pfzs, groups)


def trial_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0x5E75]))


def run_trial(s: Scenario, planner: nav.PlannerKind | str, seed: int = 0, record=None) -> TrialResult:
    """Simulate until the goal is within ``goal_tol`` or ``max_steps`` elapse.

    ``record``, when given, is called with ``(state, outcome)`` after each
    planning step.
    """
    kind = nav.PlannerKind(planner)
    p = s.params
    rng = trial_rng(seed)
    noise = NoiseModel.from_params(p)
    dwa_cfg = DwaConfig.from_params(s.robot, p)
    state = init_state(s)
    goal = np.asarray(s.robot.goal, dtype=float)
    rows = [(0.0, *state.robot.position, 0.0, 0.0, 0.0, 0.0)]
    flags = 0
    reached = math.dist(state.robot.position, goal) <= p.goal_tol
    while not reached and state.step < s.max_steps:
        tracks = perceive(s, state, noise, rng)
        state.tracks = tracks
        out = plan_step(kind, s, state, tracks, dwa_cfg)
        if record is not None:
            record(state, out)
        flags += int(out.frozen)
        state = step_world(s, state, (out.command.v, out.command.omega))
        vx, vy = state.robot.velocity
        rows.append((state.t, *state.robot.position, vx, vy, out.phi, float(out.frozen)))
        reached = math.dist(state.robot.position, goal) <= p.goal_tol

    steps = np.array(rows, dtype=float)
    start = np.asarray(s.robot.start, dtype=float)
    froze = flags > 0 or freeze_detected(steps, p.v_freeze, p.t_freeze, s.dt)
    length = path_length(steps)
    if reached:
        # stopping inside goal_tol would otherwise undercut the straight line
        length += math.dist(state.robot.position, goal)
    return TrialResult(
        kind.value, int(seed), steps, bool(reached),
        metric_avg_deviation(steps, start, goal), bool(froze), length,
        length / math.dist(start, goal) if reached else None,
        state.collisions, flags,
    )


def truth_tracks(state: WorldState) -> list[Track]:
    """Exact pedestrian states wrapped as tracks with zero covariance."""
    return [Track(int(i), np.array([p[0], p[1], v[0], v[1]], dtype=float), np.zeros((4, 4)), state.step)
            for i, p, v in zip(state.ids, state.pos, state.vel)]


def score_frame(s: Scenario, frame: int = 0) -> list[tuple[Group, CohesionBreakdown]]:
    """Cohesion of every group after ``frame`` steps of pedestrian motion.

    The robot stands still and perception is exact. Groups come from the
    scenario's labelled groups when present, otherwise from partitioning the
    frame; labelled groups are numbered in file order.
    """
    if frame < 0:
        raise ValueError("frame must be non-negative")
    state = init_state(s)
    for _ in range(frame):
        state = step_world(s, state, (0.0, 0.0))
    tracks = truth_tracks(state)
    vel = {t.id: t.velocity for t in tracks}
    if s.groups_truth is not None:
        groups = []
        for gid, g in enumerate(s.groups_truth):
            v = np.mean([vel[m] for m in g.members], axis=0)
            groups.append(Group(gid, tuple(sorted(g.members)), (float(v[0]), float(v[1]))))
    else:
        groups = partition_groups([t.id for t in tracks], [t.position for t in tracks],
                                  [t.velocity for t in tracks], s.params.gamma, s.params.grouping_rule,
                                  s.params.static_speed)
    members = [m for g in groups for m in g.members]
    scores = score_groups(groups, tracks, s.params, faces_for(state, members), genders_for(state))
    return [(g, scores[g.id]) for g in groups]


def frame_deviations(s: Scenario, state: WorldState | None = None) -> tuple[nav.Deviation, nav.Deviation]:
    """CoMet and Frozone deviations ``(com, froz)`` for one frame under exact perception."""
    p = s.params
    state = init_state(s) if state is None else state
    robot = state.robot
    tracks = truth_tracks(state)
    bounds = corridor_bounds(s.corridor_halfwidth, robot.radius)
    _, pfzs = comet_zones(s, state, tracks)
    com = nav.comet_deviation(robot, _avoidable(pfzs, robot, p.skip_enclosing), p.t_h, p.delta_phi, bounds,
                              path_samples=p.path_samples)
    zone, nearest = frozone_zone(s, state, tracks)
    if zone is None or not _avoidable([zone], robot, p.skip_enclosing):
        return com, nav.Deviation(0.0, 0)
    froz = nav.frozone_deviation(robot, zone, nearest, p.t_h, p.delta_phi, bounds, path_samples=p.path_samples)
    return com, froz
