"""Constant-velocity Kalman tracking keyed by detection ID.

The filter math is written over a leading batch axis so a whole frame of
tracks is predicted and updated in a handful of array operations; the
single-track functions are thin wrappers over the same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


class SingularInnovationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    q: float = 0.5  # white-noise acceleration intensity, (m/s^2)^2
    r: float = 0.01  # measurement variance per axis, m^2
    init_pos_var: float = 0.05
    init_vel_var: float = 1.0

    def __post_init__(self):
        if min(self.q, self.r, self.init_pos_var, self.init_vel_var) <= 0:
            raise ValueError("noise variances must be positive")

    @classmethod
    def from_params(cls, params) -> "NoiseModel":
        return cls(params.process_var, params.meas_var, params.init_pos_var, params.init_vel_var)


@dataclass(eq=False)
class Track:
    id: int
    x: np.ndarray  # [x, y, vx, vy]
    P: np.ndarray
    last_seen: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return (float(self.x[0]), float(self.x[1]))

    @property
    def velocity(self) -> tuple[float, float]:
        return (float(self.x[2]), float(self.x[3]))


def transition(dt: float) -> np.ndarray:
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    return F


def process_noise(dt: float, q: float) -> np.ndarray:
    a, b, c = dt**4 / 4.0, dt**3 / 2.0, dt**2
    Q = np.zeros((4, 4))
    Q[0, 0] = Q[1, 1] = a
    Q[0, 2] = Q[2, 0] = Q[1, 3] = Q[3, 1] = b
    Q[2, 2] = Q[3, 3] = c
    return q * Q


def predict_batch(x: np.ndarray, P: np.ndarray, dt: float, q: float):
    F = transition(dt)
    x = x @ F.T
    P = F @ P @ F.T + process_noise(dt, q)
    return x, P


def update_batch(x: np.ndarray, P: np.ndarray, z: np.ndarray, r: float):
    """Joseph-form update of ``(N, 4)`` states with ``(N, 2)`` position fixes."""
    S = P[:, :2, :2] + r * np.eye(2)
    det = S[:, 0, 0] * S[:, 1, 1] - S[:, 0, 1] * S[:, 1, 0]
    if np.any(np.abs(det) < 1e-300):
        raise SingularInnovationError("innovation covariance is singular")
    S_inv = np.linalg.inv(S)
    K = P[:, :, :2] @ S_inv
    x = x + np.einsum("nij,nj->ni", K, z - x[:, :2])
    IKH = np.eye(4) - K @ H
    P = IKH @ P @ np.swapaxes(IKH, 1, 2) + r * K @ np.swapaxes(K, 1, 2)
    P = 0.5 * (P + np.swapaxes(P, 1, 2))
    return x, P


def kf_predict(t: Track, dt: float, noise: NoiseModel) -> Track:
    if not dt > 0:
        raise ValueError("dt must be positive")
    x, P = predict_batch(t.x[None], t.P[None], dt, noise.q)
    return Track(t.id, x[0], P[0], t.last_seen)


def kf_update(t: Track, z, noise: NoiseModel) -> Track:
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    x, P = update_batch(t.x[None], t.P[None], z[None], noise.r)
    return Track(t.id, x[0], P[0], t.last_seen)


def new_track(tid: int, z, noise: NoiseModel, step: int = 0) -> Track:
    x = np.array([z[0], z[1], 0.0, 0.0], dtype=float)
    P = np.diag([noise.init_pos_var] * 2 + [noise.init_vel_var] * 2)
    return Track(tid, x, P, step)


def step_tracks(
    tracks: Iterable[Track],
    measurements: Mapping[int, tuple[float, float]],
    dt: float,
    noise: NoiseModel,
    step: int = 0,
    max_age: int = 5,
) -> list[Track]:
    """Advance the track store by one frame.

    Every live track is predicted; tracks with a measurement this frame are
    updated. Unknown IDs start a new track at the measured position with zero
    velocity. A track unseen for more than ``max_age`` frames is dropped.
    Returned tracks are sorted by ID.
    """
    tracks = sorted(tracks, key=lambda t: t.id)
    out: list[Track] = []
    if tracks:
        x = np.stack([t.x for t in tracks])
        P = np.stack([t.P for t in tracks])
        x, P = predict_batch(x, P, dt, noise.q)
        seen = np.array([t.id in measurements for t in tracks])
        if seen.any():
            z = np.array([measurements[t.id] for t, s in zip(tracks, seen) if s], dtype=float)
            x[seen], P[seen] = update_batch(x[seen], P[seen], z, noise.r)
        for k, t in enumerate(tracks):
            last = step if seen[k] else t.last_seen
            if step - last <= max_age:
                out.append(Track(t.id, x[k], P[k], last))
    known = {t.id for t in tracks}
    for tid in sorted(measurements):
        if tid not in known:
            out.append(new_track(tid, measurements[tid], noise, step))
    out.sort(key=lambda t: t.id)
    return out
