"""Domain types, parameters and the scenario file format.

Frame: X forward, Y left, Z up; positive angles are counterclockwise.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, NamedTuple, Sequence

from .sensor import SensorConfig


class Vec2(NamedTuple):
    x: float
    y: float


class Gender(str, Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class FacePose:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float]

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.orientation))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"face orientation must be a unit vector (norm {n})")


def face_toward(position, direction, height: float = 1.6) -> FacePose:
    """Face at ``position`` looking along the planar ``direction``."""
    n = math.hypot(direction[0], direction[1])
    if n == 0.0:
        ox, oy = 1.0, 0.0
    else:
        ox, oy = direction[0] / n, direction[1] / n
    return FacePose((float(position[0]), float(position[1]), height), (ox, oy, 0.0))


@dataclass(frozen=True)
class AgentState:
    id: int
    position: Vec2
    velocity: Vec2
    face: FacePose | None = None
    gender: Gender | None = None
    goal: Vec2 | None = None

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class RobotSpec:
    start: Vec2 = Vec2(0.0, 0.0)
    goal: Vec2 = Vec2(10.0, 0.0)
    heading: float | None = None  # None: face the goal
    v_max: float = 1.0
    omega_max: float = 1.5
    accel_max: float = 1.0
    alpha_max: float = 3.0
    radius: float = 0.3

    @property
    def initial_heading(self) -> float:
        if self.heading is not None:
            return self.heading
        return math.atan2(self.goal[1] - self.start[1], self.goal[0] - self.start[0])


COMBINE_MODES = ("additive", "gender_weighted")
GROUPING_RULES = ("nondivergence", "dot_sign")
PFZ_INFLATIONS = ("robot", "footprint")


@dataclass(frozen=True)
class ParamSet:
    """Every tunable of the pipeline; serialized into each output file."""

    # cohesion
    k_p: float = 1.0
    k_w: float = 1.0
    k_s: float = 1.0
    k_i: float = 1.0
    k_g: float = 1.5
    eta: float = 10.0
    d_clamp: float = 0.05
    tau_low: float = 5.0
    tau_high: float = 9.0
    combine_mode: str = "additive"
    # grouping
    gamma: float = 2.0
    grouping_rule: str = "nondivergence"
    static_speed: float = 0.05
    # navigation
    t_h: float = 3.0
    fov: float = math.radians(86.0)
    sense_radius: float = 5.0
    alpha_pf: float = math.radians(100.0)
    delta_phi: float = math.radians(1.0)
    path_samples: int = 6  # points checked along each candidate segment
    pfz_inflation: str = "footprint"  # robot: robot radius only; footprint: robot plus pedestrian radius
    skip_enclosing: bool = True  # ignore zones the robot already stands in
    # tracking
    process_var: float = 0.5
    meas_var: float = 0.01
    init_pos_var: float = 0.05
    init_vel_var: float = 1.0
    max_age: int = 5
    # DWA
    dwa_w_heading: float = 1.0
    dwa_w_clearance: float = 0.4
    dwa_w_speed: float = 0.8
    dwa_clearance_cap: float = 0.5
    dwa_nv: int = 6
    dwa_nw: int = 13
    dwa_horizon: float = 2.0
    dwa_sim_dt: float = 0.25
    dwa_predict_obstacles: bool = True  # extrapolate tracked pedestrians over the rollout
    dwa_rollout: str = "ramp"  # window: held window speeds; ramp: accelerate toward target speeds
    # harness
    ped_radius: float = 0.3
    v_max_ped: float = 2.5
    v_freeze: float = 0.05
    t_freeze: float = 3.0
    goal_tol: float = 0.3
    p_face: float = 0.7

    def replace(self, **changes) -> "ParamSet":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: dict[str, str | float | int]) -> "ParamSet":
        """Apply ``KEY=VAL`` style overrides, coercing by the field's default type."""
        types = {f.name: type(f.default) for f in dataclasses.fields(self)}
        changes = {}
        for key, raw in overrides.items():
            if key not in types:
                raise KeyError(f"unknown parameter {key!r}")
            if types[key] is bool and isinstance(raw, str):
                if raw.lower() not in ("1", "0", "true", "false", "yes", "no"):
                    raise ValueError(f"{key} expects a boolean, got {raw!r}")
                changes[key] = raw.lower() in ("1", "true", "yes")
            else:
                changes[key] = types[key](raw)
        return self.replace(**changes)

    def errors(self) -> list[str]:
        errs = []
        if not self.gamma > 0:
            errs.append("gamma must be positive")
        if not self.eta > 0:
            errs.append("eta must be positive")
        if not self.tau_low < self.tau_high:
            errs.append("tau_low must be below tau_high")
        if not self.t_h > 0:
            errs.append("t_h must be positive")
        if not 0 < self.fov <= math.pi:
            errs.append("fov must lie in (0, pi]")
        if not self.d_clamp > 0:
            errs.append("d_clamp must be positive")
        if self.combine_mode not in COMBINE_MODES:
            errs.append(f"combine_mode must be one of {COMBINE_MODES}")
        if self.pfz_inflation not in PFZ_INFLATIONS:
            errs.append(f"pfz_inflation must be one of {PFZ_INFLATIONS}")
        if self.dwa_rollout not in ("window", "ramp"):
            errs.append("dwa_rollout must be window or ramp")
        if self.grouping_rule not in GROUPING_RULES:
            errs.append(f"grouping_rule must be one of {GROUPING_RULES}")
        if not self.delta_phi > 0:
            errs.append("delta_phi must be positive")
        for name in ("process_var", "meas_var", "init_pos_var", "init_vel_var"):
            if not getattr(self, name) > 0:
                errs.append(f"{name} must be positive")
        return errs

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class GroupTruth:
    members: tuple[int, ...]
    cohesion: str | None = None  # low | medium | high


@dataclass(frozen=True)
class Scenario:
    agents: tuple[AgentState, ...] = ()
    robot: RobotSpec = field(default_factory=RobotSpec)
    dt: float = 0.1
    max_steps: int = 400
    corridor_halfwidth: float | None = None
    groups_truth: tuple[GroupTruth, ...] | None = None
    sensor: SensorConfig = field(default_factory=SensorConfig)
    params: ParamSet = field(default_factory=ParamSet)


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


def validate_scenario(s: Scenario) -> list[str]:
    """Return the list of invariant violations; empty means the scenario is valid."""
    errs: list[str] = []
    seen: set[int] = set()
    for a in s.agents:
        if a.id in seen:
            errs.append(f"duplicate id {a.id}")
        seen.add(a.id)
        if not _finite(*a.position, *a.velocity):
            errs.append(f"agent {a.id}: non-finite state")
        if a.goal is not None and not _finite(*a.goal):
            errs.append(f"agent {a.id}: non-finite goal")
        if a.speed > s.params.v_max_ped:
            errs.append(f"agent {a.id}: speed {a.speed:.3f} exceeds v_max_ped")
    if not s.dt > 0:
        errs.append("dt must be positive")
    if not s.max_steps > 0:
        errs.append("max_steps must be positive")
    r = s.robot
    if not _finite(*r.start, *r.goal):
        errs.append("robot start/goal must be finite")
    elif tuple(r.start) == tuple(r.goal):
        errs.append("robot start and goal coincide")
    if not (r.v_max > 0 and r.omega_max > 0 and r.radius >= 0):
        errs.append("robot limits must be positive")
    if s.corridor_halfwidth is not None and not s.corridor_halfwidth > r.radius:
        errs.append("corridor_halfwidth must exceed the robot radius")
    if s.groups_truth is not None:
        covered: set[int] = set()
        for g in s.groups_truth:
            for m in g.members:
                if m not in seen:
                    errs.append(f"group member {m} is not an agent")
                if m in covered:
                    errs.append(f"agent {m} appears in two groups")
                covered.add(m)
            if g.cohesion not in (None, "low", "medium", "high"):
                errs.append(f"unknown cohesion label {g.cohesion!r}")
    errs.extend(s.params.errors())
    errs.extend(s.sensor.errors())
    return errs


# -- file format -------------------------------------------------------------

def _agent_to_dict(a: AgentState) -> dict:
    d: dict[str, Any] = {"id": a.id, "position": list(a.position), "velocity": list(a.velocity)}
    if a.goal is not None:
        d["goal"] = list(a.goal)
    if a.face is not None:
        d["face"] = {"position": list(a.face.position), "orientation": list(a.face.orientation)}
    if a.gender is not None:
        d["gender"] = a.gender.value
    return d


def _agent_from_dict(d: dict) -> AgentState:
    face = d.get("face")
    return AgentState(
        id=int(d["id"]),
        position=Vec2(*map(float, d["position"])),
        velocity=Vec2(*map(float, d.get("velocity", (0.0, 0.0)))),
        face=FacePose(tuple(face["position"]), tuple(face["orientation"])) if face else None,
        gender=Gender(d["gender"]) if d.get("gender") is not None else None,
        goal=Vec2(*map(float, d["goal"])) if d.get("goal") is not None else None,
    )


def scenario_to_dict(s: Scenario) -> dict:
    robot = dataclasses.asdict(s.robot)
    robot["start"], robot["goal"] = list(s.robot.start), list(s.robot.goal)
    out = {
        "agents": [_agent_to_dict(a) for a in s.agents],
        "robot": robot,
        "params": s.params.as_dict(),
        "sensor": dataclasses.asdict(s.sensor),
        "sim": {"dt": s.dt, "max_steps": s.max_steps, "corridor_halfwidth": s.corridor_halfwidth},
    }
    if s.groups_truth is not None:
        out["groups"] = [{"members": list(g.members), "cohesion": g.cohesion} for g in s.groups_truth]
    return out


def scenario_from_dict(d: dict) -> Scenario:
    robot = dict(d.get("robot", {}))
    for k in ("start", "goal"):
        if k in robot:
            robot[k] = Vec2(*map(float, robot[k]))
    params = ParamSet(**d.get("params", {}))
    sensor_d = dict(d.get("sensor", {}))
    sensor_d.setdefault("fov", params.fov)
    sim = d.get("sim", {})
    groups = d.get("groups")
    return Scenario(
        agents=tuple(_agent_from_dict(a) for a in d.get("agents", [])),
        robot=RobotSpec(**robot),
        dt=float(sim.get("dt", 0.1)),
        max_steps=int(sim.get("max_steps", 400)),
        corridor_halfwidth=sim.get("corridor_halfwidth"),
        groups_truth=None if groups is None else tuple(
            GroupTruth(tuple(int(m) for m in g["members"]), g.get("cohesion")) for g in groups
        ),
        sensor=SensorConfig(**sensor_d),
        params=params,
    )


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dump_scenario(s) + "\n", encoding="utf-8")


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def agents_by_id(agents: Sequence[AgentState]) -> dict[int, AgentState]:
    return {a.id: a for a in agents}
