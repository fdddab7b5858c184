"""Group cohesion components, combined score and level classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, Flag, auto
from itertools import combinations
from typing import Mapping, Sequence

from .grouping import STATIC_SPEED, Group

SQRT2 = math.sqrt(2.0)
THETA_WINDOW = math.pi / 4.0
ANGLE_EPS = 1e-9  # round-off slack at theta = 0 and at the window edge


class Level(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class Feature(Flag):
    NONE = 0
    PROXIMITY = auto()
    SPEED = auto()
    SIZE = auto()
    INTERACTION = auto()
    GENDER = auto()


@dataclass(frozen=True)
class CohesionBreakdown:
    c_p: float = 0.0
    c_w: float = 0.0
    c_s: float = 0.0
    c_i: float = 0.0
    c_g: float = 1.0
    c_tot: float = 0.0
    level: Level = Level.LOW
    features: Feature = Feature.NONE

    def feature_names(self) -> str:
        names = [f.name.lower() for f in Feature if f and f in self.features]
        return "+".join(names) if names else "-"


def proximity_score(positions: Sequence[Sequence[float]], k_p: float, d_clamp: float) -> float:
    n = len(positions)
    if n < 2:
        return 0.0
    total = sum(max(math.dist(a, b), d_clamp) for a, b in combinations(positions, 2))
    return k_p * n / total


def walking_speed_score(group_speeds: Sequence[float], scene_speeds: Sequence[float], k_w: float,
                        eta: float, static_speed: float = STATIC_SPEED) -> float:
    """Scene mean speed over group mean speed, capped at ``eta``.

    A static group scores the cap ``k_w * eta``.
    """
    group_mean = sum(group_speeds) / len(group_speeds)
    scene_mean = sum(scene_speeds) / len(scene_speeds) if scene_speeds else group_mean
    if group_mean < static_speed:
        return k_w * eta
    return k_w * min(scene_mean / group_mean, eta)


def group_size_score(n: int, k_s: float) -> float:
    return k_s * n


def is_interacting(f_i, f_j) -> bool:
    """True when the faces' extrapolated points are closer than the faces themselves."""
    pi, oi = f_i.position, f_i.orientation
    pj, oj = f_j.position, f_j.orientation
    before = math.dist(pi, pj)
    after = math.dist([a + b for a, b in zip(pi, oi)], [a + b for a, b in zip(pj, oj)])
    return before > after


def facing_angle(o_i, o_j) -> float:
    """Signed planar angle from ``o_i`` to the reversed ``o_j``; 0 when facing."""
    ax, ay = o_i[0], o_i[1]
    bx, by = -o_j[0], -o_j[1]
    return math.atan2(ax * by - ay * bx, ax * bx + ay * by)


def pair_interaction(theta: float) -> float:
    if abs(theta) > THETA_WINDOW + ANGLE_EPS:
        return 0.0
    return (1.0 if theta >= -ANGLE_EPS else -1.0) / math.cos(theta)


def interaction_score(faces: Sequence, k_i: float) -> float:
    """Mean-normalized sum of per-pair facing terms.

    ``faces`` is ordered by member ID; pairs are taken with the lower ID first,
    which fixes the sign of each angle.
    """
    n = len(faces)
    if n < 2:
        return 0.0
    total = sum(pair_interaction(facing_angle(a.orientation, b.orientation))
                for a, b in combinations(faces, 2))
    return k_i * total / n


def gender_score(genders: Sequence, k_g: float) -> float:
    if not genders or any(g is None for g in genders):
        return 1.0
    return 1.0 if len(set(genders)) == 1 else k_g


def total_score(b: CohesionBreakdown, mode: str = "additive") -> float:
    if mode == "gender_weighted":
        return b.c_p + b.c_g * (b.c_w + b.c_s) + b.c_i
    if mode == "additive":
        return b.c_p + b.c_w + b.c_s + b.c_i
    raise ValueError(f"unknown combine mode {mode!r}")


def classify(c_tot: float, tau_low: float, tau_high: float) -> Level:
    if c_tot < tau_low:
        return Level.LOW
    if c_tot < tau_high:
        return Level.MEDIUM
    return Level.HIGH


def score_group(group: Group, positions: Mapping[int, Sequence[float]], speeds: Mapping[int, float],
                params, faces: Mapping | None = None, genders: Mapping | None = None) -> CohesionBreakdown:
    """Full breakdown for one group; singletons are not scored.

    ``speeds`` covers every tracked pedestrian in the frame (the scene), so the
    walking-speed term can normalize by the scene mean.
    """
    members = sorted(group.members)
    n = len(members)
    if n < 2:
        return CohesionBreakdown()
    feats = Feature.PROXIMITY | Feature.SPEED | Feature.SIZE
    c_p = proximity_score([positions[m] for m in members], params.k_p, params.d_clamp)
    c_w = walking_speed_score([speeds[m] for m in members], list(speeds.values()),
                              params.k_w, params.eta, params.static_speed)
    c_s = group_size_score(n, params.k_s)

    c_i = 0.0
    posed = [faces[m] for m in members if faces and faces.get(m) is not None]
    if len(posed) >= 2:
        c_i = interaction_score(posed, params.k_i)
        feats |= Feature.INTERACTION

    c_g = 1.0
    if params.combine_mode == "gender_weighted" and genders is not None:
        gs = [genders.get(m) for m in members]
        if all(g is not None for g in gs):
            c_g = gender_score(gs, params.k_g)
            feats |= Feature.GENDER

    partial = CohesionBreakdown(c_p, c_w, c_s, c_i, c_g)
    c_tot = total_score(partial, params.combine_mode)
    return CohesionBreakdown(c_p, c_w, c_s, c_i, c_g, c_tot,
                             classify(c_tot, params.tau_low, params.tau_high), feats)


def score_groups(groups: Sequence[Group], tracks, params, faces=None, genders=None) -> dict[int, CohesionBreakdown]:
    positions = {t.id: t.position for t in tracks}
    speeds = {t.id: math.hypot(*t.velocity) for t in tracks}
    return {g.id: score_group(g, positions, speeds, params, faces, genders) for g in groups}
