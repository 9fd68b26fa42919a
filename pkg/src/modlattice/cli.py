"""Command-line surface tying the pipeline together.

Subcommands: generate, plan, bench, mppi, export, replay.  Every subcommand
is deterministic given its flags and seed.  Exit codes: 0 success, 2 invalid
arguments, 3 planner timeout, 4 search exhausted, 1 other errors.

Defaults may come from a JSON config file (``--config``); precedence is
flags > config file > built-in defaults.  Unknown config keys are rejected.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .benchmark import (
    RATIOS,
    SuiteSpec,
    derive_goal,
    random_connected_config,
    run_suite,
    write_aggregate_json,
    write_records_csv,
    write_timings_csv,
)
from .export import export_model
from .heuristics import HeuristicKind, PenaltyConfig
from .lattice import (
    ModuleType,
    StructureError,
    configuration_from_json,
    load_configuration,
    save_configuration,
)
from .macro_planner import CandidateMode, OutcomeKind, SearchLimits, plan_bidirectional
from .motion import CostTable, executable_plan_from_json, executable_plan_to_json, refine
from .mppi import MODELS, MppiConfig, MppiController, simulate
from .replay import replay

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TIMEOUT = 3
EXIT_EXHAUSTED = 4

#: Keys the JSON config file may set; everything else is rejected.
CONFIG_KEYS = {
    "heuristic",
    "penalty",
    "penalty_scale",
    "penalty_weights",
    "mode",
    "timeout",
    "max_expansions",
    "r_reach",
    "face_cost",
    "edge_cost",
    "pick_cost",
    "place_cost",
    "mppi_horizon",
    "mppi_samples",
    "mppi_anneal_steps",
    "mppi_temperature",
    "mppi_sigma0",
    "mppi_decay",
    "mppi_dt",
}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise StructureError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _setting(args, cfg: dict, key: str, default):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return cfg[key]
    return default


def _penalty_from(args, cfg: dict) -> PenaltyConfig:
    enabled = _setting(args, cfg, "penalty", True)
    if not enabled:
        return PenaltyConfig.disabled()
    scale = float(_setting(args, cfg, "penalty_scale", 0.5))
    weights = cfg.get("penalty_weights")
    if weights:
        return PenaltyConfig(
            enabled=True,
            scale=scale,
            weights={ModuleType.from_name(k): float(v) for k, v in weights.items()},
        )
    return PenaltyConfig(enabled=True, scale=scale)


def _cost_table_from(args, cfg: dict) -> CostTable:
    return CostTable(
        face=float(_setting(args, cfg, "face_cost", 1.0)),
        edge=float(_setting(args, cfg, "edge_cost", 2.0)),
        pick=float(_setting(args, cfg, "pick_cost", 3.0)),
        place=float(_setting(args, cfg, "place_cost", 3.0)),
    )


def cmd_generate(args) -> int:
    if args.ratio not in RATIOS:
        print(
            f"error: unknown ratio {args.ratio!r}; choose one of {sorted(RATIOS)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    ini = random_connected_config(args.n, RATIOS[args.ratio], rng)
    goal = derive_goal(ini, args.overlap, rng)
    save_configuration(ini, args.out_ini)
    save_configuration(goal, args.out_goal)
    print(f"wrote {args.out_ini} and {args.out_goal}")
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _load_config(args.config)
    ini = load_configuration(args.ini)
    goal = load_configuration(args.goal)
    kind = HeuristicKind(_setting(args, cfg, "heuristic", "hungarian"))
    penalty = _penalty_from(args, cfg)
    mode = CandidateMode(_setting(args, cfg, "mode", "targeted"))
    limits = SearchLimits(
        timeout_s=float(_setting(args, cfg, "timeout", 60.0)),
        max_expansions=int(_setting(args, cfg, "max_expansions", 1_000_000)),
    )
    outcome = plan_bidirectional(ini, goal, kind, penalty, mode, limits)
    if outcome.kind is OutcomeKind.TIMEOUT:
        _write_json(args.out, {"outcome": "timeout", "stats": outcome.stats.to_json()})
        print("planner timed out", file=sys.stderr)
        return EXIT_TIMEOUT
    if outcome.kind is OutcomeKind.EXHAUSTED:
        _write_json(args.out, {"outcome": "exhausted", "stats": outcome.stats.to_json()})
        print("search space exhausted without a plan", file=sys.stderr)
        return EXIT_EXHAUSTED
    costs = _cost_table_from(args, cfg)
    r_reach = int(_setting(args, cfg, "r_reach", 2))
    start_stance = min(ini.cells())
    exe = refine(ini, outcome.plan, start_stance, costs, r_reach)
    doc = executable_plan_to_json(exe, outcome.stats)
    doc["outcome"] = "solved"
    _write_json(args.out, doc)
    print(
        f"solved: {len(outcome.plan)} relocations, execution cost {exe.total_cost}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    with open(args.suite) as fh:
        spec = SuiteSpec.from_json(json.load(fh))
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    t0 = time.perf_counter()

    def progress(done, total):
        if done % 25 == 0 or done == total:
            print(f"  {done}/{total} trials ({time.perf_counter() - t0:.0f}s)")

    records, aggregates = run_suite(spec, workers=args.workers, progress=progress)
    write_records_csv(records, f"{args.out_dir}/trials.csv")
    write_timings_csv(records, f"{args.out_dir}/timings.csv")
    write_aggregate_json(aggregates, f"{args.out_dir}/aggregates.json")
    print(f"wrote {args.out_dir}/trials.csv, timings.csv, aggregates.json")
    return EXIT_OK


def cmd_mppi(args) -> int:
    cfg_file = _load_config(args.config)
    model_cls = MODELS.get(args.model)
    if model_cls is None:
        print(
            f"error: unknown model {args.model!r}; choose one of {sorted(MODELS)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    model = model_cls()
    sigma0 = cfg_file.get("mppi_sigma0", [0.5] * model.action_dim)
    common = dict(
        horizon=int(_setting(args, cfg_file, "mppi_horizon", 32)),
        temperature=float(_setting(args, cfg_file, "mppi_temperature", 0.1)),
        sigma0=tuple(float(s) for s in sigma0),
        dt=float(_setting(args, cfg_file, "mppi_dt", 0.02)),
        seed=args.seed,
    )
    if args.variant == "annealed":
        cfg = MppiConfig(samples=args.samples or 256, anneal_steps=4, decay=0.5, **common)
    else:
        cfg = MppiConfig(samples=args.samples or 1024, anneal_steps=1, decay=1.0, **common)
    controller = MppiController(model, cfg, args.vcmd)
    s0 = np.zeros(model.state_dim)
    _, log = simulate(controller, s0, args.steps)
    with open(args.out, "w", newline="") as fh:
        fields = ["step", "time", "command", "achieved", "action"]
        if args.timing:
            fields.append("cycle_wall_s")
        writer = csv.writer(fh)
        writer.writerow(fields)
        for i in range(len(log.steps)):
            row = [
                log.steps[i],
                repr(log.times[i]),
                repr(log.commands[i]),
                repr(log.achieved[i]),
                ";".join(repr(a) for a in log.actions[i]),
            ]
            if args.timing:
                row.append(f"{log.cycle_wall_s[i]:.6f}")
            writer.writerow(row)
    err = np.abs(np.asarray(log.achieved[-50:]) - args.vcmd).mean()
    print(f"wrote {args.out}; mean |output - command| over last 50 steps: {err:.4f}")
    return EXIT_OK


def cmd_export(args) -> int:
    with open(args.instance) as fh:
        doc = json.load(fh)
    cfg = configuration_from_json(doc)
    axes = {}
    for e in doc.get("modules", []):
        if "axis" in e:
            axes[tuple(int(v) for v in e["pos"])] = tuple(float(v) for v in e["axis"])
    model = export_model(cfg, axes)
    _write_json(args.out, model.to_json())
    print(
        f"wrote {args.out}: {len(model.bodies)} bodies, {len(model.joints)} joints"
    )
    return EXIT_OK


def cmd_replay(args) -> int:
    cfg = _load_config(args.config)
    ini = load_configuration(args.ini)
    goal = load_configuration(args.goal)
    with open(args.plan) as fh:
        plan = executable_plan_from_json(json.load(fh))
    costs = _cost_table_from(args, cfg)
    r_reach = int(_setting(args, cfg, "r_reach", 2))
    result = replay(ini, goal, plan, costs, r_reach)
    print(("PASS: " if result.ok else "FAIL: ") + result.message)
    return EXIT_OK if result.ok else 1


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="modlattice",
        description="Lattice modular-robot reconfiguration planning and control",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random instance pair")
    g.add_argument("--n", type=int, required=True, help="module count (>= 2)")
    g.add_argument("--ratio", default="typeA", help="typeA | typeB | typeC")
    g.add_argument("--overlap", type=float, default=0.5, help="target overlap in (0, 1]")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-ini", default="ini.json")
    g.add_argument("--out-goal", default="goal.json")
    g.set_defaults(func=cmd_generate)

    pl = sub.add_parser("plan", help="plan and refine a reconfiguration")
    pl.add_argument("--ini", required=True)
    pl.add_argument("--goal", required=True)
    pl.add_argument("--heuristic", choices=["hungarian", "greedy"], default=None)
    pl.add_argument("--penalty", dest="penalty", action="store_true", default=None)
    pl.add_argument("--no-penalty", dest="penalty", action="store_false")
    pl.add_argument("--mode", choices=["targeted", "full"], default=None)
    pl.add_argument("--timeout", type=float, default=None, help="seconds (default 60)")
    pl.add_argument("--max-expansions", type=int, default=None)
    pl.add_argument("--r-reach", type=int, default=None)
    pl.add_argument("--config", default=None, help="JSON config file")
    pl.add_argument("--out", default="plan.json")
    pl.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, help="suite spec JSON file")
    b.add_argument("--out-dir", default="bench_out")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    m = sub.add_parser("mppi", help="closed-loop controller run")
    m.add_argument("--model", default="unicycle", help="unicycle | pointmass")
    m.add_argument("--vcmd", type=float, default=0.8)
    m.add_argument("--variant", choices=["annealed", "standard"], default="annealed")
    m.add_argument("--steps", type=int, default=200)
    m.add_argument("--samples", type=int, default=None)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--timing", action="store_true", help="include wall-clock column")
    m.add_argument("--config", default=None)
    m.add_argument("--out", default="mppi_log.csv")
    m.set_defaults(func=cmd_mppi)

    e = sub.add_parser("export", help="export an articulated model")
    e.add_argument("--instance", required=True)
    e.add_argument("--out", default="model.json")
    e.set_defaults(func=cmd_export)

    r = sub.add_parser("replay", help="validate a plan file by re-execution")
    r.add_argument("--ini", required=True)
    r.add_argument("--goal", required=True)
    r.add_argument("--plan", required=True)
    r.add_argument("--r-reach", type=int, default=None)
    r.add_argument("--config", default=None)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StructureError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
