"""Randomized corridor benchmark with paired seeds across planners."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..world import AgentState, GroupTruth, Gender, ParamSet, RobotSpec, Scenario, Vec2, face_toward
from ..sensor import SensorConfig
from .metrics import bootstrap_ci, metric_freezing_rate
from .simulate import TrialResult, run_trial

PLANNER_LABELS = {"dwa": "DWA", "frozone": "DWA + Frozone", "comet": "DWA + CoMet"}
METRICS = (
    ("avg_deviation_deg", "Avg. Deviation Angle"),
    ("freezing_rate", "Freezing Rate"),
    ("normalized_path_length", "Normalized Path Length"),
)


@dataclass(frozen=True)
class CorridorConfig:
    length: float = 20.0
    halfwidth: float = 3.0
    robot_start: tuple[float, float] = (1.0, 0.0)
    robot_goal: tuple[float, float] = (19.0, 0.0)
    spawn_x: tuple[float, float] = (3.0, 20.0)
    speed_range: tuple[float, float] = (0.5, 1.5)
    cluster_sizes: tuple[int, int] = (2, 5)
    p_static: float = 0.0  # share of standing clusters
    p_oncoming: float = 0.6
    member_spread: tuple[float, float] = (0.6, 2.0)  # cluster radius range
    min_separation: float = 0.6
    wall_margin: float = 0.3


@dataclass(frozen=True)
class BenchConfig:
    counts: tuple[int, ...] = (10, 20, 30, 40, 50)
    trials: int = 50
    planners: tuple[str, ...] = ("dwa", "frozone", "comet")
    base_seed: int = 0
    dt: float = 0.1
    max_steps: int = 500
    corridor: CorridorConfig = field(default_factory=CorridorConfig)
    robot: RobotSpec = field(default_factory=RobotSpec)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    params: ParamSet = field(default_factory=ParamSet)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["robot"]["start"], d["robot"]["goal"] = list(self.corridor.robot_start), list(self.corridor.robot_goal)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.trials)]


def bench_config_from_dict(d: dict) -> BenchConfig:
    d = dict(d)
    params = ParamSet(**d.pop("params", {}))
    sensor_d = dict(d.pop("sensor", {}))
    sensor_d.setdefault("fov", params.fov)
    corridor_d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.pop("corridor", {}).items()}
    robot_d = {k: v for k, v in d.pop("robot", {}).items() if k not in ("start", "goal")}
    for k in ("counts", "planners"):
        if k in d:
            d[k] = tuple(d[k])
    return BenchConfig(corridor=CorridorConfig(**corridor_d), robot=RobotSpec(**robot_d),
                       sensor=SensorConfig(**sensor_d), params=params, **d)


def load_bench_config(path) -> BenchConfig:
    return bench_config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _cluster_sizes(count: int, lo: int, hi: int, rng) -> list[int]:
    sizes = []
    left = count
    while left > 0:
        n = int(rng.integers(lo, hi + 1))
        n = min(n, left)
        sizes.append(n)
        left -= n
    return sizes


def _member_offsets(n: int, spread: float, min_sep: float, rng) -> np.ndarray:
    pts: list[np.ndarray] = []
    tries = 0
    while len(pts) < n:
        tries += 1
        r = spread * math.sqrt(rng.random())
        a = rng.uniform(-math.pi, math.pi)
        cand = np.array([r * math.cos(a), r * math.sin(a)])
        if tries > 200 or all(np.hypot(*(cand - q)) >= min_sep for q in pts):
            pts.append(cand)
    return np.array(pts)


def make_corridor_scenario(count: int, seed: int, cfg: BenchConfig) -> Scenario:
    """Pedestrian clusters of 2-5 members sharing one velocity, scattered along the corridor.

    The pedestrian world depends only on ``(count, seed)``, never on the
    planner, which is what makes the planners' trials paired.
    """
    c = cfg.corridor
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(count), 0xC0]))
    ymax = c.halfwidth - c.wall_margin
    agents: list[AgentState] = []
    groups: list[GroupTruth] = []
    next_id = 0
    for size in _cluster_sizes(count, c.cluster_sizes[0], c.cluster_sizes[1], rng):
        center = np.array([rng.uniform(*c.spawn_x), rng.uniform(-ymax + 0.5, ymax - 0.5)])
        if rng.random() < c.p_static:
            vel = np.zeros(2)
        else:
            sign = -1.0 if rng.random() < c.p_oncoming else 1.0
            vel = np.array([sign * rng.uniform(*c.speed_range), 0.0])
        spread = rng.uniform(*c.member_spread)
        offsets = _member_offsets(size, spread, c.min_separation, rng)
        members = center + offsets
        members[:, 1] = np.clip(members[:, 1], -ymax, ymax)
        centroid = members.mean(axis=0)
        ids = []
        for p in members:
            if size > 1 and rng.random() < cfg.params.p_face:
                look = centroid - p
            elif np.any(vel):
                look = vel
            else:
                a = rng.uniform(-math.pi, math.pi)
                look = np.array([math.cos(a), math.sin(a)])
            gender = Gender.A if rng.random() < 0.5 else Gender.B
            goal = None
            if np.any(vel):
                goal = Vec2(float(p[0] + math.copysign(60.0, vel[0])), float(p[1]))
            agents.append(AgentState(next_id, Vec2(float(p[0]), float(p[1])), Vec2(float(vel[0]), float(vel[1])),
                                     face_toward(p, look), gender, goal))
            ids.append(next_id)
            next_id += 1
        groups.append(GroupTruth(tuple(ids)))
    robot = dataclasses.replace(cfg.robot, start=Vec2(*c.robot_start), goal=Vec2(*c.robot_goal))
    return Scenario(tuple(agents), robot, cfg.dt, cfg.max_steps, c.halfwidth, tuple(groups), cfg.sensor, cfg.params)


def _run_cell(job):
    cfg, count, seed, planner = job
    return count, seed, planner, run_trial(make_corridor_scenario(count, seed, cfg), planner, seed)


@dataclass
class CellStats:
    planner: str
    count: int
    trials: int
    reached: int
    avg_deviation_deg: float
    freezing_rate: float
    normalized_path_length: float
    freezing_ci: tuple[float, float]
    deviation_ci: tuple[float, float]
    path_ci: tuple[float, float]
    collisions: float


@dataclass
class BatchReport:
    config: BenchConfig
    cells: dict  # (planner, count) -> CellStats
    results: dict  # (planner, count) -> list[TrialResult] ordered by seed

    @property
    def config_hash(self) -> str:
        return self.config.digest()

    def cell(self, planner: str, count: int) -> CellStats:
        return self.cells[(planner, count)]


def summarize(planner: str, count: int, results: list[TrialResult], seed: int = 0) -> CellStats:
    devs = [r.avg_deviation_deg for r in results]
    frz = [float(r.froze) for r in results]
    npl = [r.normalized_path_length for r in results if r.normalized_path_length is not None]
    return CellStats(
        planner, count, len(results), len(npl),
        float(np.mean(devs)), metric_freezing_rate(results),
        float(np.mean(npl)) if npl else float("nan"),
        bootstrap_ci(frz, seed=seed), bootstrap_ci(devs, seed=seed), bootstrap_ci(npl, seed=seed),
        float(np.mean([r.collisions for r in results])),
    )


def run_benchmark(cfg: BenchConfig, threads: int = 1, progress=None) -> BatchReport:
    jobs = [(cfg, n, s, p) for n in cfg.counts for s in cfg.seeds() for p in cfg.planners]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            outs: Iterable = ex.map(_run_cell, jobs, chunksize=4)
            outs = list(outs)
    else:
        outs = []
        for job in jobs:
            outs.append(_run_cell(job))
            if progress is not None:
                progress(len(outs), len(jobs))
    results: dict = {}
    for count, seed, planner, res in sorted(outs, key=lambda o: (o[2], o[0], o[1])):
        results.setdefault((planner, count), []).append(res)
    cells = {key: summarize(key[0], key[1], rs) for key, rs in results.items()}
    return BatchReport(cfg, cells, results)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def _header(cfg: BenchConfig) -> str:
    return f"# config_hash={cfg.digest()}\n# config={json.dumps(cfg.as_dict(), sort_keys=True)}\n"


def table_csv(report: BatchReport) -> str:
    """Metric x method rows, one column per pedestrian count."""
    cfg = report.config
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "method"] + [f"{n} peds" for n in cfg.counts])
    for key, label in METRICS:
        for planner in cfg.planners:
            w.writerow([label, PLANNER_LABELS.get(planner, planner)]
                       + [_fmt(getattr(report.cells[(planner, n)], key)) for n in cfg.counts])
    return buf.getvalue()


def cells_csv(report: BatchReport) -> str:
    cfg = report.config
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["planner", "count", "trials", "reached", "avg_deviation_deg", "deviation_ci_lo", "deviation_ci_hi",
                "freezing_rate", "freezing_ci_lo", "freezing_ci_hi", "normalized_path_length", "path_ci_lo",
                "path_ci_hi", "mean_collisions"])
    for planner in cfg.planners:
        for n in cfg.counts:
            c = report.cells[(planner, n)]
            w.writerow([planner, n, c.trials, c.reached, _fmt(c.avg_deviation_deg), *map(_fmt, c.deviation_ci),
                        _fmt(c.freezing_rate), *map(_fmt, c.freezing_ci), _fmt(c.normalized_path_length),
                        *map(_fmt, c.path_ci), _fmt(c.collisions)])
    return buf.getvalue()


def trials_csv(report: BatchReport) -> str:
    cfg = report.config
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["planner", "count", "seed", "reached_goal", "froze", "freeze_flags", "avg_deviation_deg",
                "path_length", "normalized_path_length", "collisions", "n_steps"])
    for planner in cfg.planners:
        for n in cfg.counts:
            for r in report.results[(planner, n)]:
                w.writerow([planner, n, r.seed, int(r.reached_goal), int(r.froze), r.freeze_flags,
                            _fmt(r.avg_deviation_deg), _fmt(r.path_length), _fmt(r.normalized_path_length),
                            r.collisions, len(r.steps) - 1])
    return buf.getvalue()


def write_report(report: BatchReport, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"table": out / "table.csv", "cells": out / "cells.csv", "trials": out / "trials.csv"}
    paths["table"].write_text(table_csv(report), encoding="utf-8")
    paths["cells"].write_text(cells_csv(report), encoding="utf-8")
    paths["trials"].write_text(trials_csv(report), encoding="utf-8")
    return paths
