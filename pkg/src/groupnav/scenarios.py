"""Hand-built reference scenes."""

from __future__ import annotations

import math

from .world import AgentState, Gender, GroupTruth, RobotSpec, Scenario, Vec2, face_toward

# Two groups and a loner walking at the robot. Their predicted positions span
# one wide five-sided hull, while the per-group zones leave the straight line
# to the goal open.
_TWO_GROUPS = (
    # id, position, velocity, group
    (0, (4.5, 1.6), (-0.5, 0.0), 0),
    (1, (5.3, 1.6), (-0.5, 0.0), 0),
    (2, (4.9, 2.3), (-0.5, 0.0), 0),
    (3, (4.1, -1.6), (-0.5, 0.0), 1),
    (4, (4.5, -1.5), (-0.5, 0.0), 1),
    (5, (5.3, -4.1), (-0.8, 0.5), 2),
)


def two_groups_scenario() -> Scenario:
    """Triangle group, dyad and individual ahead of a robot heading for (10, 0)."""
    agents = []
    groups: dict[int, list[int]] = {}
    for aid, pos, vel, gid in _TWO_GROUPS:
        members = [p for _, p, _, g in _TWO_GROUPS if g == gid]
        cx = sum(p[0] for p in members) / len(members)
        cy = sum(p[1] for p in members) / len(members)
        face = face_toward(pos, (cx - pos[0], cy - pos[1])) if len(members) > 1 else None
        agents.append(AgentState(aid, Vec2(*pos), Vec2(*vel), face=face))
        groups.setdefault(gid, []).append(aid)
    return Scenario(
        agents=tuple(agents),
        robot=RobotSpec(Vec2(0.0, 0.0), Vec2(10.0, 0.0)),
        groups_truth=tuple(GroupTruth(tuple(m)) for m in groups.values()),
    )


def empty_scenario(length: float = 10.0) -> Scenario:
    return Scenario(robot=RobotSpec(Vec2(0.0, 0.0), Vec2(length, 0.0)))


def boxed_in_scenario(ring: float = 0.8, n: int = 10) -> Scenario:
    """Standing pedestrians on a circle around the robot."""
    agents = tuple(
        AgentState(k, Vec2(ring * math.cos(2 * math.pi * k / n), ring * math.sin(2 * math.pi * k / n)),
                   Vec2(0.0, 0.0), gender=Gender.A if k % 2 else Gender.B)
        for k in range(n)
    )
    return Scenario(agents=agents, robot=RobotSpec(Vec2(0.0, 0.0), Vec2(10.0, 0.0)), max_steps=100)
