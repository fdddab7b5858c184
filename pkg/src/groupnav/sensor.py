"""Synthetic RGB-D observation and the bounding-box localization model.

Agents are reduced to a bounding-box centroid column and a small depth patch.
The forward model is the exact inverse of :func:`angular_displacement` and
:func:`localize`, so with zero noise the localization round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class RangeUnavailableError(ValueError):
    """Depth patch holds no valid pixel."""


class InvalidRangeError(ValueError):
    """Non-positive range handed to the localizer."""


@dataclass(frozen=True)
class SensorConfig:
    width: int = 640
    height: int = 480
    fov: float = math.radians(86.0)
    max_range: float = 10.0
    min_range: float = 0.3
    centroid_noise_std: float = 0.5  # px
    depth_noise_std: float = 0.03  # m
    patch_halfwidth: int = 1
    occlusion: str = "none"

    def errors(self) -> list[str]:
        errs = []
        if self.width <= 0 or self.height <= 0:
            errs.append("image size must be positive")
        if not 0.0 < self.fov <= math.pi:
            errs.append("sensor fov must lie in (0, pi]")
        if not 0.0 < self.min_range < self.max_range:
            errs.append("need 0 < min_range < max_range")
        if self.centroid_noise_std < 0 or self.depth_noise_std < 0:
            errs.append("noise std must be non-negative")
        if self.patch_halfwidth < 0:
            errs.append("patch_halfwidth must be non-negative")
        if self.occlusion != "none":
            errs.append(f"unsupported occlusion model {self.occlusion!r}")
        return errs


@dataclass(frozen=True)
class Detection:
    id: int
    bbox_centroid: tuple[float, float]
    depth_patch: np.ndarray  # NaN marks an invalid pixel

    @property
    def x_cen(self) -> float:
        return self.bbox_centroid[0]


def angular_displacement(x_cen: float, w: float, fov: float) -> float:
    """Bearing of a centroid column; positive to the left of the optical axis."""
    return ((w / 2.0 - x_cen) / w) * fov


def localize(d: float, psi: float) -> tuple[float, float]:
    if not d > 0:
        raise InvalidRangeError(f"range must be positive, got {d}")
    return (d * math.cos(psi), d * math.sin(psi))


def pairwise_distance(p_i: Sequence[float], p_j: Sequence[float]) -> float:
    return math.hypot(p_i[0] - p_j[0], p_i[1] - p_j[1])


def depth_estimate(det: Detection) -> float:
    patch = np.asarray(det.depth_patch, dtype=float)
    valid = patch[np.isfinite(patch)]
    if valid.size == 0:
        raise RangeUnavailableError(f"no valid depth for detection {det.id}")
    return float(valid.mean())


def to_camera(points, robot_pose) -> np.ndarray:
    """World points into the robot frame (X forward, Y left)."""
    x, y, heading = robot_pose
    pts = np.atleast_2d(np.asarray(points, dtype=float)) - (x, y)
    c, s = math.cos(heading), math.sin(heading)
    return np.column_stack((c * pts[:, 0] + s * pts[:, 1], -s * pts[:, 0] + c * pts[:, 1]))


def to_world(point, robot_pose) -> tuple[float, float]:
    x, y, heading = robot_pose
    c, s = math.cos(heading), math.sin(heading)
    return (x + c * point[0] - s * point[1], y + s * point[0] + c * point[1])


def observe(agents, robot_pose, cfg: SensorConfig, rng: np.random.Generator) -> list[Detection]:
    """One detection per agent inside the field of view and depth range.

    ``robot_pose`` is ``(x, y, heading)`` in the world frame. Out-of-view
    agents are dropped, never clamped. Noise draws happen in agent order so a
    given generator state reproduces the same detections.
    """
    if not agents:
        return []
    rel = to_camera([a.position for a in agents], robot_pose)
    rng_ = np.hypot(rel[:, 0], rel[:, 1])
    psi = np.arctan2(rel[:, 1], rel[:, 0])
    half = cfg.fov / 2.0
    visible = (np.abs(psi) <= half) & (rng_ >= cfg.min_range) & (rng_ <= cfg.max_range)

    side = 2 * cfg.patch_halfwidth + 1
    out = []
    for k in np.flatnonzero(visible):
        x_cen = cfg.width / 2.0 - (psi[k] / cfg.fov) * cfg.width
        if cfg.centroid_noise_std > 0:
            x_cen += rng.normal(0.0, cfg.centroid_noise_std)
        x_cen = min(max(x_cen, 0.0), float(cfg.width))
        patch = np.full((side, side), rng_[k])
        if cfg.depth_noise_std > 0:
            patch = patch + rng.normal(0.0, cfg.depth_noise_std, size=patch.shape)
        patch[(patch < cfg.min_range) | (patch > cfg.max_range)] = np.nan
        out.append(Detection(int(agents[k].id), (float(x_cen), cfg.height / 2.0), patch))
    return out


def measure(det: Detection, cfg: SensorConfig, robot_pose) -> tuple[float, float] | None:
    """World-frame position of a detection, or None when depth is unavailable."""
    try:
        d = depth_estimate(det)
    except RangeUnavailableError:
        return None
    local = localize(d, angular_displacement(det.x_cen, cfg.width, cfg.fov))
    return to_world(local, robot_pose)
