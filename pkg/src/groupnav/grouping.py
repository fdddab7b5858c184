"""Group detection from tracked positions and walking vectors.

Two pedestrians are linked when they are within ``gamma`` of each other and
their one-step extrapolated positions do not drift apart. Groups are the
connected components of that graph; unlinked pedestrians become singletons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

STATIC_SPEED = 0.05


@dataclass(frozen=True)
class Group:
    id: int
    members: tuple[int, ...]
    avg_velocity: tuple[float, float] = (0.0, 0.0)

    @property
    def size(self) -> int:
        return len(self.members)


def _is_static(v, static_speed: float) -> bool:
    return math.hypot(v[0], v[1]) < static_speed


def pair_compatible(p_i, v_i, p_j, v_j, gamma: float, rule: str = "nondivergence",
                    static_speed: float = STATIC_SPEED) -> bool:
    dx, dy = p_i[0] - p_j[0], p_i[1] - p_j[1]
    dist = math.hypot(dx, dy)
    if dist > gamma:
        return False
    static_i, static_j = _is_static(v_i, static_speed), _is_static(v_j, static_speed)
    if static_i and static_j:
        return True
    if rule == "dot_sign":
        if static_i or static_j:
            return False
        return v_i[0] * v_j[0] + v_i[1] * v_j[1] > 0.0
    dvx, dvy = v_i[0] - v_j[0], v_i[1] - v_j[1]
    return dist >= math.hypot(dx + dvx, dy + dvy)


def compatibility_graph(positions: np.ndarray, velocities: np.ndarray, gamma: float,
                        rule: str = "nondivergence", static_speed: float = STATIC_SPEED) -> np.ndarray:
    """Boolean adjacency matrix of compatible pairs (diagonal False)."""
    p = np.asarray(positions, dtype=float).reshape(-1, 2)
    v = np.asarray(velocities, dtype=float).reshape(-1, 2)
    dp = p[:, None, :] - p[None, :, :]
    dist = np.hypot(dp[..., 0], dp[..., 1])
    static = np.hypot(v[:, 0], v[:, 1]) < static_speed
    both_static = static[:, None] & static[None, :]
    if rule == "dot_sign":
        moving = ~static[:, None] & ~static[None, :]
        motion_ok = moving & ((v @ v.T) > 0.0)
    else:
        ahead = dp + (v[:, None, :] - v[None, :, :])
        motion_ok = dist >= np.hypot(ahead[..., 0], ahead[..., 1])
    adj = (dist <= gamma) & (both_static | motion_ok)
    np.fill_diagonal(adj, False)
    return adj


def partition_groups(ids: Sequence[int], positions, velocities, gamma: float,
                     rule: str = "nondivergence", static_speed: float = STATIC_SPEED) -> list[Group]:
    """Disjoint cover of ``ids`` by connected components of the compatibility graph.

    Groups are ordered by their smallest member ID and numbered from 0.
    """
    ids = list(ids)
    if not ids:
        return []
    v = np.asarray(velocities, dtype=float).reshape(-1, 2)
    adj = compatibility_graph(positions, v, gamma, rule, static_speed)
    _, labels = connected_components(csr_matrix(adj), directed=False)
    comps: dict[int, list[int]] = {}
    for k, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(k)
    ordered = sorted(comps.values(), key=lambda idx: min(ids[i] for i in idx))
    groups = []
    for gid, idx in enumerate(ordered):
        idx = sorted(idx, key=lambda i: ids[i])
        mean_v = v[idx].mean(axis=0)
        groups.append(Group(gid, tuple(ids[i] for i in idx), (float(mean_v[0]), float(mean_v[1]))))
    return groups


def groups_from_tracks(tracks, params) -> list[Group]:
    return partition_groups(
        [t.id for t in tracks],
        [t.position for t in tracks],
        [t.velocity for t in tracks],
        params.gamma, params.grouping_rule, params.static_speed,
    )
