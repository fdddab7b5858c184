"""Command-line entry point: score, run, bench and plot."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from .harness.bench import BenchConfig, load_bench_config, run_benchmark, write_report
from .harness.simulate import STEP_COLUMNS, run_trial, score_frame
from .navigation import PlannerKind
from .world import ParamSet, load_scenario, scenario_to_dict, validate_scenario


def parse_overrides(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected KEY=VAL, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _params_line(params: ParamSet) -> str:
    return f"# params={json.dumps(params.as_dict(), sort_keys=True)}\n"


def _load(args):
    s = load_scenario(args.scenario)
    s = dataclasses.replace(s, params=s.params.with_overrides(parse_overrides(args.params)))
    errs = validate_scenario(s)
    if errs:
        raise SystemExit("invalid scenario:\n  " + "\n  ".join(errs))
    return s


def cmd_score(args) -> int:
    s = _load(args)
    rows = score_frame(s, args.frame)
    out = sys.stdout
    out.write(_params_line(s.params))
    w = csv.writer(out, delimiter=args.delimiter, lineterminator="\n")
    w.writerow(["frame", "group", "members", "size", "c_p", "c_w", "c_s", "c_i", "c_g", "c_tot", "level",
                "features"])
    for g, b in rows:
        w.writerow([args.frame, g.id, " ".join(map(str, g.members)), g.size, f"{b.c_p:.6f}", f"{b.c_w:.6f}",
                    f"{b.c_s:.6f}", f"{b.c_i:.6f}", f"{b.c_g:.6f}", f"{b.c_tot:.6f}", b.level.value,
                    b.feature_names()])
    return 0


def cmd_run(args) -> int:
    s = _load(args)
    res = run_trial(s, args.planner, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"result": res.summary(), "params": s.params.as_dict(), "scenario": scenario_to_dict(s)}
    (out / "result.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    with open(out / "steps.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(_params_line(s.params))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEP_COLUMNS)
        for row in res.steps:
            w.writerow([f"{v:.6f}" for v in row[:-1]] + [int(row[-1])])
    r = res.summary()
    print(f"{r['planner']} seed={r['seed']} reached={r['reached_goal']} froze={r['froze']} "
          f"path={r['path_length']:.3f} deviation={r['avg_deviation_deg']:.2f}deg -> {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = load_bench_config(args.config) if args.config else BenchConfig()
    changes = {"params": cfg.params.with_overrides(parse_overrides(args.params))}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.counts:
        changes["counts"] = tuple(args.counts)
    cfg = dataclasses.replace(cfg, **changes)
    errs = cfg.params.errors()
    if errs:
        raise SystemExit("invalid parameters:\n  " + "\n  ".join(errs))

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} trials", end="", file=sys.stderr, flush=True)

    report = run_benchmark(cfg, threads=args.threads, progress=progress)
    if args.verbose:
        print(file=sys.stderr)
    paths = write_report(report, args.out)
    if not args.no_plot:
        from .plotting import render
        paths["figure"] = render(args.out, Path(args.out) / "summary.png")
    sys.stdout.write(paths["table"].read_text(encoding="utf-8"))
    return 0


def cmd_plot(args) -> int:
    from .plotting import render
    print(render(args.inp, args.out))
    return 0


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands suppress defaults so flags given before the subcommand survive
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=d(None), help="random seed (run: trial seed, bench: base seed)")
    # separate destinations: a subparser would otherwise replace the global list
    common.add_argument("--params", action="append", metavar="KEY=VAL", default=d(None),
                        dest="sub_params" if suppress else "params",
                        help="parameter override, repeatable, e.g. --params t_h=2.5 --params gamma=3")
    common.add_argument("--threads", type=int, default=d(1), help="worker processes for bench")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupnav", description=__doc__, parents=[_global_flags(False)])
    common = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="per-group cohesion report for one frame")
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--frame", type=int, default=0, help="steps of pedestrian motion before scoring")
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("run", parents=[common], help="simulate one trial")
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--planner", required=True, choices=[k.value for k in PlannerKind])
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", parents=[common], help="corridor benchmark table")
    p.add_argument("--config", type=Path, default=None, help="JSON bench config; defaults if omitted")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--counts", type=int, nargs="+", default=None)
    p.add_argument("--no-plot", action="store_true", help="skip the summary figure")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", parents=[common], help="render figures from run or bench output")
    p.add_argument("--in", dest="inp", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.params = (args.params or []) + getattr(args, "sub_params", [])
    if args.command == "run" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (KeyError, ValueError, FileNotFoundError) as exc:
        print(f"groupnav: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
