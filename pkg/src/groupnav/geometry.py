"""Planar convex hulls and membership predicates.

Hulls are first-class values even when degenerate: one vertex is a point,
two vertices a segment, three or more a convex polygon in counterclockwise
order. Membership is defined through the Euclidean distance to the hull, so
``contains(h, p, r)`` is exactly membership in the Minkowski sum of ``h``
with a disc of radius ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EPS = 1e-9


@dataclass(frozen=True)
class Hull:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("hull needs at least one vertex")

    @property
    def kind(self) -> str:
        n = len(self.vertices)
        return "point" if n == 1 else "segment" if n == 2 else "polygon"

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.vertices)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[Sequence[float]]) -> Hull:
    """Andrew's monotone chain.

    Collinear and duplicate points are dropped, so the result has no three
    consecutive collinear vertices. The first vertex is the lexicographically
    smallest point.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise ValueError("convex hull of an empty point set")
    if len(pts) == 1:
        return Hull((pts[0],))

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= EPS:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= EPS:
            upper.pop()
        upper.append(p)

    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2 and ring[0] == ring[1]:
        ring = ring[:1]
    return Hull(tuple(ring))


def segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each row of ``points`` to the closed segment ab."""
    ab = b - a
    denom = float(ab @ ab)
    ap = points - a
    if denom == 0.0:
        return np.hypot(ap[:, 0], ap[:, 1])
    t = np.clip((ap @ ab) / denom, 0.0, 1.0)
    d = ap - t[:, None] * ab
    return np.hypot(d[:, 0], d[:, 1])


def hull_distance(h: Hull, points) -> np.ndarray:
    """Euclidean distance from points to the hull; 0 inside a polygon."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = h.array
    if len(v) == 1:
        d = pts - v[0]
        return np.hypot(d[:, 0], d[:, 1])
    if len(v) == 2:
        return segment_distance(pts, v[0], v[1])

    nxt = np.roll(v, -1, axis=0)
    edges = nxt - v
    rel = pts[:, None, :] - v[None, :, :]
    cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
    inside = np.all(cross >= 0.0, axis=1)

    lens2 = np.einsum("ij,ij->i", edges, edges)
    t = np.clip(np.einsum("mij,ij->mi", rel, edges) / lens2, 0.0, 1.0)
    diff = rel - t[:, :, None] * edges[None, :, :]
    dist = np.min(np.hypot(diff[:, :, 0], diff[:, :, 1]), axis=1)
    dist[inside] = 0.0
    return dist


def contains_points(h: Hull, points, eps: float = EPS) -> np.ndarray:
    return hull_distance(h, points) <= eps


def contains(h: Hull, p, eps: float = EPS) -> bool:
    return bool(contains_points(h, [p], eps)[0])


def in_region_P(p, pfz_min: Hull, others: Sequence[Hull], eps: float = EPS) -> bool:
    """Membership in ``pfz_min`` minus its overlap with every hull in ``others``."""
    return bool(in_region_P_many([p], pfz_min, others, eps)[0])


def in_region_P_many(points, pfz_min: Hull, others: Sequence[Hull], eps: float = EPS) -> np.ndarray:
    mask = contains_points(pfz_min, points, eps)
    for h in others:
        if not mask.any():
            break
        mask &= ~contains_points(h, points, eps)
    return mask


def rotate(points, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts @ np.array([[c, s], [-s, c]])
