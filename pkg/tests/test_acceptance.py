"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The benchmark criteria (3 and 4) share one run of the full corridor benchmark
and take a few minutes; deselect them with ``-m "not slow"``.
"""

import dataclasses
import math
from itertools import combinations

import numpy as np
import pytest

from groupnav import navigation as nav
from groupnav.cli import main
from groupnav.cohesion import CohesionBreakdown, facing_angle, pair_interaction, score_group
from groupnav.geometry import convex_hull, hull_distance, in_region_P_many
from groupnav.grouping import Group
from groupnav.harness.bench import BenchConfig, run_benchmark
from groupnav.harness.simulate import frame_deviations
from groupnav.scenarios import two_groups_scenario
from groupnav.sensor import SensorConfig, measure, observe
from groupnav.tracking import NoiseModel, step_tracks
from groupnav.world import AgentState, Gender, ParamSet, Vec2, face_toward

from oracles import brute_force_hull, grid_search, outside_zones, rasterize, zone_geometry
from verdicts import verdict

DEG = math.radians(1.0)
ROOT2 = math.sqrt(2.0)


def _rng(tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([2024, tag]))


# 1. CoMet never deviates more than Frozone ---------------------------------

def _prop2_scene(rng, t_h, margin):
    groups, pos, vel = [], [], []
    for _ in range(rng.integers(2, 11)):
        centre = rng.uniform((1.0, -4.0), (6.0, 4.0))
        heading = rng.uniform(-math.pi, math.pi)
        speed = rng.uniform(0.0, 1.5)
        m = rng.integers(1, 6)
        p = centre + rng.uniform(-0.8, 0.8, size=(m, 2))
        v = np.tile([speed * math.cos(heading), speed * math.sin(heading)], (m, 1)) + rng.normal(0, 0.1, (m, 2))
        groups.append((p, v))
        pos.append(p)
        vel.append(v)
    pos, vel = np.vstack(pos), np.vstack(vel)
    zones = []
    for k, (p, v) in enumerate(groups):
        g = Group(k, tuple(range(len(p))))
        zones.append(nav.build_pfz(p + v * t_h, g, margin, CohesionBreakdown(c_tot=float(rng.uniform(0, 10)))))
    froz = nav.frozone_pfz(pos, vel, t_h, margin)
    nearest = pos[np.argmin(np.hypot(pos[:, 0], pos[:, 1]))]
    return zones, froz, nearest


def test_criterion_1_comet_deviation_bounded_by_frozone():
    rng = _rng(1)
    robot = nav.RobotState((0.0, 0.0), 0.0, (10.0, 0.0))
    scenes, compared, violations = 1000, 0, []
    for k in range(scenes):
        zones, froz, nearest = _prop2_scene(rng, 3.0, 0.6)
        for samples in (1, 6):
            com = nav.comet_deviation(robot, zones, 3.0, DEG, path_samples=samples)
            fz = nav.frozone_deviation(robot, froz, nearest, 3.0, DEG, path_samples=samples)
            if com.frozen or fz.frozen:
                continue
            compared += 1
            if abs(com.phi) > abs(fz.phi) + DEG + 1e-12:
                violations.append((k, samples, com.phi, fz.phi))
    ok = not violations and compared >= scenes
    verdict("1", ok, f"{scenes} scenes, {compared} finite comparisons, {len(violations)} violations of "
                     f"|phi_com| <= |phi_froz| + 1 deg")
    assert ok, violations[:5]


# 2. Cohesion components stay within their bounds ---------------------------

def _random_group(rng, params):
    n = int(rng.integers(1, 6))
    pos = rng.uniform(-2.0, 2.0, size=(n, 2))
    if n > 1 and rng.random() < 0.2:
        pos[1] = pos[0]  # coincident pair exercises the distance clamp
    speeds = rng.uniform(0.0, 2.0, size=n)
    if rng.random() < 0.2:
        speeds[:] = 0.0
    extra = rng.uniform(0.0, 2.0, size=int(rng.integers(0, 10)))
    ids = list(range(n))
    faces = {i: face_toward(pos[i], rng.normal(size=2)) for i in ids if rng.random() < 0.8}
    genders = {i: Gender.A if rng.random() < 0.5 else Gender.B for i in ids}
    positions = {i: tuple(pos[i]) for i in ids}
    scene = {i: float(speeds[i]) for i in ids}
    scene.update({100 + j: float(s) for j, s in enumerate(extra)})
    return Group(0, tuple(ids)), positions, scene, faces, genders


def test_criterion_2_cohesion_bounded():
    rng = _rng(2)
    modes = (ParamSet(), ParamSet(combine_mode="gender_weighted"))
    trials, bad = 10_000, []
    for k in range(trials):
        p = modes[k % 2]
        g, positions, speeds, faces, genders = _random_group(rng, p)
        b = score_group(g, positions, speeds, p, faces, genders)
        n = g.size
        if n < 2:
            if b.c_tot != 0.0:
                bad.append((k, "singleton"))
            continue
        pairs = n * (n - 1) // 2
        posed = [faces[m] for m in sorted(g.members) if m in faces]
        terms = [pair_interaction(facing_angle(a.orientation, c.orientation)) for a, c in combinations(posed, 2)]
        checks = {
            "c_p": 0.0 < b.c_p <= p.k_p * n / (pairs * p.d_clamp) + 1e-12,
            "c_w": 0.0 <= b.c_w <= p.k_w * p.eta + 1e-12,
            "c_s": b.c_s == p.k_s * n,
            "pair": all(t == 0.0 or 1.0 - 1e-12 <= abs(t) <= ROOT2 + 1e-12 for t in terms),
            "c_i": abs(b.c_i) <= ROOT2 * p.k_i * (n - 1) / 2 + 1e-12,
            "c_tot": math.isfinite(b.c_tot),
        }
        bad.extend((k, name) for name, passed in checks.items() if not passed)
    verdict("2", not bad, f"{trials} random groups, {len(bad)} bound violations")
    assert not bad, bad[:5]


# 3 and 4. Corridor benchmark ------------------------------------------------

@pytest.fixture(scope="module")
def corridor_report():
    return run_benchmark(dataclasses.replace(BenchConfig(), planners=("frozone", "comet")))


@pytest.mark.slow
def test_criterion_3_benchmark_ordering(corridor_report):
    cfg = corridor_report.config
    com = {n: corridor_report.cell("comet", n) for n in cfg.counts}
    frz = {n: corridor_report.cell("frozone", n) for n in cfg.counts}
    a = all(com[n].freezing_rate <= frz[n].freezing_rate for n in cfg.counts) and all(
        com[n].freezing_rate < frz[n].freezing_rate for n in (40, 50))
    b = all(com[n].normalized_path_length <= frz[n].normalized_path_length for n in cfg.counts)
    c = all(com[n].avg_deviation_deg <= frz[n].avg_deviation_deg for n in (40, 50))
    rows = "; ".join(f"{n}: frz {com[n].freezing_rate:.2f}/{frz[n].freezing_rate:.2f} "
                     f"npl {com[n].normalized_path_length:.3f}/{frz[n].normalized_path_length:.3f} "
                     f"dev {com[n].avg_deviation_deg:.1f}/{frz[n].avg_deviation_deg:.1f}" for n in cfg.counts)
    ok = a and b and c
    verdict("3", ok, f"(a) freezing {'ok' if a else 'fails'}, (b) path {'ok' if b else 'fails'}, "
                     f"(c) deviation {'ok' if c else 'fails'} over {cfg.trials} trials [comet/frozone] {rows}")
    assert a, "CoMet freezing rate must not exceed Frozone's (strictly lower at 40 and 50)"
    assert b, "CoMet path length must not exceed Frozone's"
    assert c, "CoMet deviation must not exceed Frozone's at 40 and 50"


@pytest.mark.slow
def test_criterion_4_frozone_freezes_comet_half(corridor_report):
    com, frz = corridor_report.cell("comet", 50), corridor_report.cell("frozone", 50)
    ok = frz.freezing_rate > 0 and com.freezing_rate < frz.freezing_rate / 2
    verdict("4", ok, f"50 peds: Frozone {frz.freezing_rate:.2f} "
                     f"[{frz.freezing_ci[0]:.2f}, {frz.freezing_ci[1]:.2f}], CoMet {com.freezing_rate:.2f} "
                     f"[{com.freezing_ci[0]:.2f}, {com.freezing_ci[1]:.2f}] (95% bootstrap)")
    assert frz.freezing_rate > 0
    assert com.freezing_rate < frz.freezing_rate / 2


# 5. Sensor round trip -------------------------------------------------------

def test_criterion_5_sensor_round_trip():
    rng = _rng(5)
    cfg = SensorConfig(centroid_noise_std=0.0, depth_noise_std=0.0)
    worst, seen, total = 0.0, 0, 10_000
    for _ in range(total // 100):
        pose = (*rng.uniform(-20, 20, 2), rng.uniform(-math.pi, math.pi))
        r = rng.uniform(cfg.min_range + 0.01, cfg.max_range - 0.1, 100)
        psi = rng.uniform(-0.499, 0.499, 100) * cfg.fov
        xy = np.column_stack((pose[0] + r * np.cos(pose[2] + psi), pose[1] + r * np.sin(pose[2] + psi)))
        agents = [AgentState(i, Vec2(*p), Vec2(0.0, 0.0)) for i, p in enumerate(xy)]
        dets = observe(agents, pose, cfg, rng)
        seen += len(dets)
        for det in dets:
            worst = max(worst, math.dist(measure(det, cfg, pose), xy[det.id]))
    ok = seen == total and worst <= 1e-6
    verdict("5", ok, f"{seen}/{total} agents detected, max localization error {worst:.2e} m")
    assert ok


# 6. Kalman convergence ------------------------------------------------------

def test_criterion_6_kalman_velocity_converges():
    rng = _rng(6)
    worst, dt = 0.0, 0.1
    for v in rng.uniform(-2.0, 2.0, size=(100, 2)):
        tracks = []
        for k in range(51):  # first frame creates the track, then 50 updates
            tracks = step_tracks(tracks, {0: (v[0] * k * dt, v[1] * k * dt)}, dt, NoiseModel(), step=k)
        worst = max(worst, float(np.abs(np.subtract(tracks[0].velocity, v)).max()))
    ok = worst <= 1e-3
    verdict("6", ok, f"100 velocities, worst velocity error {worst:.2e} m/s after 50 updates")
    assert ok


# 7. Hulls and region P against oracles --------------------------------------

def _raster_check(rng, pixel=1e-3):
    a = convex_hull(rng.uniform(0.0, 1.5, size=(rng.integers(3, 9), 2)))
    b = convex_hull(rng.uniform(0.5, 2.0, size=(rng.integers(3, 9), 2)))
    x0 = y0 = 0.0
    nx = ny = int(round(2.0 / pixel))
    img = rasterize(a.vertices, x0, y0, nx, ny, pixel) & ~rasterize(b.vertices, x0, y0, nx, ny, pixel) \
        if a.kind == b.kind == "polygon" else None
    if img is None:
        return 0, 0
    ij = rng.integers(0, nx, size=(400, 2))
    pts = np.column_stack((x0 + (ij[:, 1] + 0.5) * pixel, y0 + (ij[:, 0] + 0.5) * pixel))
    # away from boundaries: a few pixels from either outline
    near = lambda h: np.array([abs(_signed(h, p)) < 5 * pixel for p in pts])
    keep = ~(near(a) | near(b))
    got = in_region_P_many(pts[keep], a, [b], eps=0.0)
    want = img[ij[keep, 0], ij[keep, 1]]
    return int(keep.sum()), int(np.count_nonzero(got != want))


def _signed(h, p):
    d = hull_distance(h, [p])[0]
    if d > 0:
        return d
    v = h.array
    e = np.roll(v, -1, axis=0) - v
    n = np.column_stack((e[:, 1], -e[:, 0])) / np.hypot(e[:, 0], e[:, 1])[:, None]
    return float(np.max(np.sum((p - v) * n, axis=1)))


def test_criterion_7_hull_and_region_oracles():
    rng = _rng(7)
    hull_bad = 0
    for _ in range(500):
        pts = [tuple(p) for p in np.round(rng.uniform(-5, 5, size=(rng.integers(1, 51), 2)), 1)]
        h = convex_hull(pts)
        ref = brute_force_hull(pts)
        if set(h.vertices) != ref or len(h.vertices) != len(ref):
            hull_bad += 1
    pairs, checked, raster_bad = 0, 0, 0
    while pairs < 100:
        n, bad = _raster_check(rng)
        if n:
            pairs += 1
            checked += n
            raster_bad += bad
    ok = hull_bad == 0 and raster_bad == 0
    verdict("7", ok, f"500 hulls, {hull_bad} mismatches; {pairs} region pairs, {checked} points, "
                     f"{raster_bad} raster mismatches at 1 mm")
    assert ok


# 8. Deviation search against a fine grid ------------------------------------

def test_criterion_8_deviation_search_matches_fine_grid():
    rng = _rng(8)
    robot = nav.RobotState((0.0, 0.0), 0.0, (10.0, 0.0))
    v = robot.preferred_velocity()
    worst, mismatched, scenes = 0.0, 0, 200
    for _ in range(scenes):
        centre = rng.uniform((1.0, -1.5), (5.0, 1.5))
        pts = centre + rng.uniform(-1.0, 1.0, size=(rng.integers(1, 7), 2))
        z = nav.build_pfz(pts, 0, 0.3)
        got = nav.deviation_search(robot.position, v, robot.goal, nav.outside_all([z]), 3.0, DEG)
        want = grid_search(robot.position, v, robot.goal, outside_zones([(zone_geometry(z.hull.vertices), 0.3)]),
                           3.0, 0.1)
        if (got is None) != (want is None):
            mismatched += 1
        elif got is not None:
            worst = max(worst, abs(got - want))
    ok = mismatched == 0 and worst <= DEG + 1e-9
    verdict("8", ok, f"{scenes} scenes, {mismatched} feasibility mismatches, worst gap {math.degrees(worst):.2f} deg")
    assert ok


# 9. Layout where groups make deviation unnecessary --------------------------

def test_criterion_9_layout_regression():
    com, froz = frame_deviations(two_groups_scenario())
    ok = froz.phi is not None and froz.phi > 0 and com.phi == 0.0
    verdict("9", ok, f"phi_froz = {math.degrees(froz.phi or 0.0):.1f} deg, phi_com = {math.degrees(com.phi or 0.0):.1f} deg")
    assert ok


# 10. Determinism of the benchmark CSVs --------------------------------------

def test_criterion_10_bench_is_byte_identical(tmp_path, capsys):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["--seed", "11", "bench", "--out", str(out), "--trials", "3", "--counts", "10", "20",
                     "--no-plot"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    capsys.readouterr()
    ok = len(outs[0]) == 3 and outs[0] == outs[1]
    verdict("10", ok, f"{len(outs[0])} CSV files compared, identical={outs[0] == outs[1]}")
    assert ok
