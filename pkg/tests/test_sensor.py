import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupnav.sensor import (Detection, InvalidRangeError, RangeUnavailableError, SensorConfig,
                             angular_displacement, depth_estimate, localize, measure, observe,
                             pairwise_distance)
from groupnav.world import AgentState, Vec2

QUIET = SensorConfig(centroid_noise_std=0.0, depth_noise_std=0.0)


def _agent(i, x, y):
    return AgentState(i, Vec2(x, y), Vec2(0.0, 0.0))


def test_dead_ahead_detection():
    (det,) = observe([_agent(0, 3.0, 0.0)], (0.0, 0.0, 0.0), QUIET, np.random.default_rng(0))
    assert det.x_cen == pytest.approx(QUIET.width / 2)
    assert depth_estimate(det) == pytest.approx(3.0)


def test_outside_fov_is_omitted():
    cfg = SensorConfig(fov=1.5, centroid_noise_std=0.0, depth_noise_std=0.0)
    psi = cfg.fov / 2 + 0.01
    assert observe([_agent(0, 3 * math.cos(psi), 3 * math.sin(psi))], (0.0, 0.0, 0.0), cfg,
                   np.random.default_rng(0)) == []


def test_out_of_range_is_omitted():
    assert observe([_agent(0, 50.0, 0.0), _agent(1, 0.1, 0.0)], (0.0, 0.0, 0.0), QUIET,
                   np.random.default_rng(0)) == []


def test_centroid_inverts_bearing():
    cfg = SensorConfig(width=640, fov=1.5, centroid_noise_std=0.0, depth_noise_std=0.0)
    (det,) = observe([_agent(0, 4 * math.cos(0.2), 4 * math.sin(0.2))], (0.0, 0.0, 0.0), cfg,
                     np.random.default_rng(0))
    # 320 - (0.2 / 1.5) * 640
    assert det.x_cen == pytest.approx(234.6667, abs=1e-3)


@pytest.mark.parametrize("patch,expected", [([2.0, 2.0, 2.0, 2.0], 2.0), ([1.0, 3.0], 2.0),
                                            ([np.nan, 1.0, 3.0], 2.0)])
def test_depth_mean(patch, expected):
    assert depth_estimate(Detection(0, (0.0, 0.0), np.array(patch))) == pytest.approx(expected)


def test_depth_all_invalid():
    with pytest.raises(RangeUnavailableError):
        depth_estimate(Detection(0, (0.0, 0.0), np.array([np.nan, np.nan])))


def test_noisy_depth_mean_concentrates():
    hits = 0
    for seed in range(1000):
        patch = np.random.default_rng(seed).normal(4.0, 0.01, size=9)
        hits += abs(depth_estimate(Detection(0, (0.0, 0.0), patch)) - 4.0) <= 0.02
    assert hits == 1000


@pytest.mark.parametrize("x_cen,w,fov,psi", [(320, 640, 1.5, 0.0), (0, 640, 1.5, 0.75), (480, 640, 1.5, -0.375)])
def test_angular_displacement(x_cen, w, fov, psi):
    assert angular_displacement(x_cen, w, fov) == pytest.approx(psi)


@pytest.mark.parametrize("d,psi,xy", [(2, 0.0, (2, 0)), (1, math.pi / 2, (0, 1)), (5, 0.375, (4.652, 1.832))])
def test_localize(d, psi, xy):
    assert localize(d, psi) == pytest.approx(xy, abs=1e-3)


def test_localize_rejects_non_positive_range():
    with pytest.raises(InvalidRangeError):
        localize(0.0, 0.1)


@pytest.mark.parametrize("a,b,d", [((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0), ((1.2, -0.5), (-0.8, 1.0), 2.5)])
def test_pairwise_distance(a, b, d):
    assert pairwise_distance(a, b) == pytest.approx(d)
    assert pairwise_distance(b, a) == pytest.approx(d)


@given(st.floats(0.01, 30.0), st.floats(-3.0, 3.0))
def test_localize_norm_is_range(d, psi):
    assert math.hypot(*localize(d, psi)) == pytest.approx(d, rel=1e-12)


@given(st.floats(0.31, 9.9), st.floats(-0.499, 0.499), st.floats(-20, 20), st.floats(-20, 20), st.floats(-math.pi, math.pi))
def test_noiseless_round_trip(r, frac, rx, ry, heading):
    psi = frac * QUIET.fov
    ax, ay = rx + r * math.cos(heading + psi), ry + r * math.sin(heading + psi)
    pose = (rx, ry, heading)
    (det,) = observe([_agent(0, ax, ay)], pose, QUIET, np.random.default_rng(0))
    assert math.dist(measure(det, QUIET, pose), (ax, ay)) <= 1e-6


@given(st.floats(-15, 15), st.floats(-15, 15))
def test_detections_never_clamped(x, y):
    dets = observe([_agent(0, x, y)], (0.0, 0.0, 0.0), QUIET, np.random.default_rng(0))
    r, psi = math.hypot(x, y), math.atan2(y, x)
    visible = abs(psi) <= QUIET.fov / 2 and QUIET.min_range <= r <= QUIET.max_range
    assert len(dets) == int(visible)
