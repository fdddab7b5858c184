"""Static figures rendered from the CSV logs written by ``run`` and ``bench``."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

PLANNER_STYLE = {"dwa": ("DWA", "tab:gray"), "frozone": ("DWA + Frozone", "tab:orange"),
                 "comet": ("DWA + CoMet", "tab:blue")}


def read_log(path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Rows of a CSV whose leading ``# key=value`` lines carry metadata."""
    meta, body = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                body.append(line)
    return meta, list(csv.DictReader(body))


def _column(rows, name) -> np.ndarray:
    return np.array([float(r[name]) for r in rows])


def plot_trial(fig: Figure, steps_csv, result_json=None) -> None:
    _, rows = read_log(steps_csv)
    t, x, y = _column(rows, "t"), _column(rows, "x"), _column(rows, "y")
    speed = np.hypot(_column(rows, "vx"), _column(rows, "vy"))
    phi = np.degrees(_column(rows, "phi"))
    frozen = _column(rows, "frozen") > 0

    info = json.loads(Path(result_json).read_text(encoding="utf-8")) if result_json else {}
    scen = info.get("scenario", {})
    ax_path, ax_v, ax_phi = fig.subplots(3, 1, gridspec_kw={"height_ratios": [2, 1, 1]})

    half = scen.get("sim", {}).get("corridor_halfwidth")
    if half is not None:
        for side in (-half, half):
            ax_path.axhline(side, color="k", lw=1.5)
    for a in scen.get("agents", []):
        ax_path.plot(*a["position"], "o", color="tab:red", ms=3, alpha=0.5)
    ax_path.plot(x, y, "-", color="tab:blue", lw=1.5, label="robot")
    ax_path.plot(x[frozen], y[frozen], "x", color="k", ms=5, label="freeze flag")
    robot = scen.get("robot", {})
    if "goal" in robot:
        ax_path.plot(*robot["goal"], "*", color="tab:green", ms=10, label="goal")
    ax_path.set_aspect("equal", adjustable="datalim")
    ax_path.set_xlabel("x [m]")
    ax_path.set_ylabel("y [m]")
    res = info.get("result", {})
    if res:
        ax_path.set_title(f"{res['planner']} seed {res['seed']}: reached={res['reached_goal']} froze={res['froze']}")
    ax_path.legend(loc="upper right", fontsize="small")

    ax_v.plot(t, speed, color="tab:blue")
    ax_v.set_ylabel("speed [m/s]")
    ax_phi.plot(t, phi, color="tab:orange")
    ax_phi.set_ylabel("deviation [deg]")
    ax_phi.set_xlabel("t [s]")


def plot_bench(fig: Figure, cells_csv) -> None:
    _, rows = read_log(cells_csv)
    panels = (("freezing_rate", "freezing_ci", "Freezing rate"),
              ("normalized_path_length", "path_ci", "Normalized path length"),
              ("avg_deviation_deg", "deviation_ci", "Avg. deviation [deg]"))
    axes = fig.subplots(1, len(panels))
    planners = list(dict.fromkeys(r["planner"] for r in rows))
    for ax, (key, ci, label) in zip(axes, panels):
        for p in planners:
            sub = sorted((r for r in rows if r["planner"] == p), key=lambda r: int(r["count"]))
            n = np.array([int(r["count"]) for r in sub])
            mid, lo, hi = _column(sub, key), _column(sub, f"{ci}_lo"), _column(sub, f"{ci}_hi")
            name, color = PLANNER_STYLE.get(p, (p, None))
            ax.errorbar(n, mid, yerr=np.vstack((mid - lo, hi - mid)).clip(min=0), marker="o", capsize=3, label=name, color=color)
        ax.set_xlabel("pedestrians")
        ax.set_title(label)
    axes[0].legend(fontsize="small")


def render(in_dir, out_file) -> Path:
    """Figure for a ``run`` directory (steps.csv) or a ``bench`` directory (cells.csv)."""
    src, out = Path(in_dir), Path(out_file)
    if (src / "cells.csv").exists():
        fig = Figure(figsize=(12, 4), layout="constrained")
        plot_bench(fig, src / "cells.csv")
        meta, _ = read_log(src / "cells.csv")
    elif (src / "steps.csv").exists():
        fig = Figure(figsize=(8, 8), layout="constrained")
        result = src / "result.json"
        plot_trial(fig, src / "steps.csv", result if result.exists() else None)
        meta, _ = read_log(src / "steps.csv")
    else:
        raise FileNotFoundError(f"{src} holds neither cells.csv nor steps.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    # PNG and PDF keep the parameters as text metadata
    keep = {"Description": json.dumps(meta, sort_keys=True)} if out.suffix.lower() in (".png", ".pdf") else None
    if out.suffix.lower() == ".pdf":
        keep = {"Subject": keep["Description"]}
    fig.savefig(out, dpi=120, metadata=keep)
    return out
