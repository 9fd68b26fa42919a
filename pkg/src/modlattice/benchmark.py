"""Procedural reconfiguration benchmarks and the experiment runner.

Instances are random connected polycubes with a typed module mix; goals are
derived from the initial structure by removing and regrowing a controlled
number of modules so the initial/goal overlap hits a target fraction.  The
suite runner sweeps scale, overlap, heterogeneity, heuristic kind and the
type-penalty switch, prices every solved plan with the low-level planner,
and aggregates success rates and paired execution costs.

Everything is a pure function of the suite seed: per-trial generators derive
from a seed sequence, trials are merged in trial-index order, and the
deterministic output files never contain wall-clock values (timings go to a
separate sidecar file).
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .heuristics import HeuristicKind, PenaltyConfig
from .lattice import (
    MODULE_TYPES,
    Configuration,
    ModuleType,
    StructureError,
    TypeRatio,
    addable_cells,
    articulation_cells,
    neighbors6,
    overlap,
)
from .macro_planner import (
    CandidateMode,
    SearchLimits,
    plan_bidirectional,
)
from .motion import CostTable, refine
from .replay import replay

#: Named heterogeneity mixes used throughout the benchmarks.
RATIOS: dict[str, TypeRatio] = {
    "typeA": TypeRatio(1.0, 0.0, 0.0),
    "typeB": TypeRatio(0.8, 0.2, 0.0),
    "typeC": TypeRatio(0.6, 0.2, 0.2),
}


def type_counts_for(n: int, ratio: TypeRatio) -> dict[ModuleType, int]:
    """Largest-remainder rounding of ratio * n to integer per-type counts."""
    quotas = {m: f * n for m, f in ratio.as_mapping().items()}
    counts = {m: int(q) for m, q in quotas.items()}
    short = n - sum(counts.values())
    by_remainder = sorted(
        MODULE_TYPES, key=lambda m: (-(quotas[m] - counts[m]), m.value)
    )
    for m in by_remainder[:short]:
        counts[m] += 1
    return counts


def random_connected_config(
    n: int, ratio: TypeRatio, rng: np.random.Generator
) -> Configuration:
    """Connected polycube grown by uniform random frontier expansion from the
    origin, with types assigned uniformly at random."""
    if n < 1:
        raise StructureError("need at least one module")
    occupied: set = {(0, 0, 0)}
    frontier = sorted(addable_cells({(0, 0, 0): None}))
    while len(occupied) < n:
        c = frontier[int(rng.integers(len(frontier)))]
        occupied.add(c)
        grown = set(frontier)
        grown.discard(c)
        for nb in neighbors6(c):
            if nb not in occupied:
                grown.add(nb)
        frontier = sorted(grown)
    cells = sorted(occupied)
    order = rng.permutation(len(cells))
    counts = type_counts_for(n, ratio)
    types: list[ModuleType] = []
    for m in MODULE_TYPES:
        types.extend([m] * counts[m])
    occ = {cells[order[i]]: types[i] for i in range(n)}
    return Configuration(occ)


def derive_goal(
    ini: Configuration,
    overlap_target: float,
    rng: np.random.Generator,
    max_retries: int = 50,
) -> Configuration:
    """Goal with overlap(ini, goal) within +-2/N of the target.

    Removes k = round((1 - target) * N) modules one at a time (uniform over
    non-articulation cells), regrows k cells at uniform addable positions,
    preferring positions distinct from the removed ones, then reassigns the
    freed module types uniformly to the new cells.
    """
    if not 0 < overlap_target <= 1:
        raise StructureError("overlap target must lie in (0, 1]")
    n = len(ini)
    k = min(round((1 - overlap_target) * n), n - 1)
    if k == 0:
        return ini
    tol = 2.0 / n
    best_achieved = None
    for _ in range(max_retries):
        occ = ini.occupancy
        removed_cells: list = []
        removed_types: list[ModuleType] = []
        for _ in range(k):
            candidates = sorted(set(occ) - articulation_cells(occ))
            c = candidates[int(rng.integers(len(candidates)))]
            removed_cells.append(c)
            removed_types.append(occ.pop(c))
        removed_set = set(removed_cells)
        new_cells: list = []
        for _ in range(k):
            add = sorted(addable_cells(occ))
            fresh = [c for c in add if c not in removed_set]
            pool = fresh if fresh else add
            c = pool[int(rng.integers(len(pool)))]
            occ[c] = ModuleType.BASE  # placeholder, retyped below
            new_cells.append(c)
        perm = rng.permutation(k)
        for i, c in enumerate(new_cells):
            occ[c] = removed_types[perm[i]]
        goal = Configuration(occ)
        achieved = overlap(ini, goal)
        if abs(achieved - overlap_target) <= tol:
            return goal
        if best_achieved is None or abs(achieved - overlap_target) < abs(
            best_achieved - overlap_target
        ):
            best_achieved = achieved
    raise StructureError(
        f"could not hit overlap target {overlap_target} "
        f"(best achieved {best_achieved:.3f} after {max_retries} retries)"
    )


@dataclass(frozen=True)
class SuiteSpec:
    sizes: tuple[int, ...] = (20, 30, 40)
    overlaps: tuple[float, ...] = (0.8, 0.5, 0.2)
    ratios: tuple[str, ...] = ("typeA", "typeB", "typeC")
    trials: int = 25
    timeout_s: float = 10.0
    heuristics: tuple[str, ...] = ("hungarian",)
    penalties: tuple[bool, ...] = (True, False)
    seed: int = 0
    candidate_mode: str = "targeted"
    r_reach: int = 2
    cost_table: CostTable = field(default_factory=CostTable)
    position_overlap: bool = False  # reserved: type-sensitive overlap is the default

    def __post_init__(self) -> None:
        if any(n < 2 for n in self.sizes):
            raise ValueError("sizes must be >= 2")
        if any(not 0 < o <= 1 for o in self.overlaps):
            raise ValueError("overlaps must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for r in self.ratios:
            if r not in RATIOS:
                raise ValueError(f"unknown ratio {r!r}; known: {sorted(RATIOS)}")

    @classmethod
    def from_json(cls, doc: dict) -> "SuiteSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown suite keys: {sorted(unknown)}")
        kw = dict(doc)
        for key in ("sizes", "overlaps", "ratios", "heuristics", "penalties"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "cost_table" in kw:
            kw["cost_table"] = CostTable(**kw["cost_table"])
        return cls(**kw)


@dataclass
class TrialRecord:
    instance_id: str
    n: int
    overlap_target: float
    overlap_achieved: float
    ratio: str
    heuristic: str
    penalty: bool
    outcome: str
    macro_len: int | None
    exec_cost: float | None
    expansions_fwd: int
    expansions_bwd: int
    fallback_engaged: bool
    replay_ok: bool | None
    plan_wall_s: float
    refine_wall_s: float


CSV_FIELDS = [
    "instance_id",
    "n",
    "overlap_target",
    "overlap_achieved",
    "ratio",
    "heuristic",
    "penalty",
    "outcome",
    "macro_len",
    "exec_cost",
    "expansions_fwd",
    "expansions_bwd",
    "fallback_engaged",
    "replay_ok",
]

TIMING_FIELDS = ["instance_id", "heuristic", "penalty", "plan_wall_s", "refine_wall_s"]


def _run_trial(job: dict) -> TrialRecord:
    spec: SuiteSpec = job["spec"]
    n, olap, ratio_name, trial = job["n"], job["overlap"], job["ratio"], job["trial"]
    heuristic_name, penalty_on = job["heuristic"], job["penalty"]
    # Instance randomness depends only on the suite seed and the instance
    # parameters, so every planner variant (and every suite sharing the seed)
    # sees the same paired instance.
    ss = np.random.SeedSequence(
        [spec.seed, n, int(round(olap * 1000)), list(RATIOS).index(ratio_name), trial]
    )
    rng = np.random.default_rng(ss)
    instance_id = f"n{n}_o{olap}_{ratio_name}_t{trial}"
    ini = random_connected_config(n, RATIOS[ratio_name], rng)
    goal = derive_goal(ini, olap, rng)
    achieved = overlap(ini, goal)
    kind = HeuristicKind(heuristic_name)
    penalty = PenaltyConfig() if penalty_on else PenaltyConfig.disabled()
    limits = SearchLimits(timeout_s=spec.timeout_s)
    mode = CandidateMode(spec.candidate_mode)
    t0 = time.perf_counter()
    try:
        outcome = plan_bidirectional(ini, goal, kind, penalty, mode, limits)
    except Exception:
        return TrialRecord(
            instance_id, n, olap, achieved, ratio_name, heuristic_name, penalty_on,
            "error", None, None, 0, 0, False, None, time.perf_counter() - t0, 0.0,
        )
    plan_wall = time.perf_counter() - t0
    macro_len = exec_cost = None
    replay_ok = None
    refine_wall = 0.0
    if outcome.solved:
        macro_len = len(outcome.plan)
        start_stance = min(ini.cells())
        t1 = time.perf_counter()
        exe = refine(ini, outcome.plan, start_stance, spec.cost_table, spec.r_reach)
        refine_wall = time.perf_counter() - t1
        exec_cost = exe.total_cost
        replay_ok = bool(replay(ini, goal, exe, spec.cost_table, spec.r_reach))
    return TrialRecord(
        instance_id=instance_id,
        n=n,
        overlap_target=olap,
        overlap_achieved=achieved,
        ratio=ratio_name,
        heuristic=heuristic_name,
        penalty=penalty_on,
        outcome=outcome.kind.value,
        macro_len=macro_len,
        exec_cost=exec_cost,
        expansions_fwd=outcome.stats.expansions_fwd,
        expansions_bwd=outcome.stats.expansions_bwd,
        fallback_engaged=outcome.stats.fallback_engaged,
        replay_ok=replay_ok,
        plan_wall_s=plan_wall,
        refine_wall_s=refine_wall,
    )


def _jobs(spec: SuiteSpec) -> list[dict]:
    jobs = []
    for n in spec.sizes:
        for olap in spec.overlaps:
            for ratio in spec.ratios:
                for heuristic in spec.heuristics:
                    for penalty in spec.penalties:
                        for trial in range(spec.trials):
                            jobs.append(
                                {
                                    "spec": spec,
                                    "n": n,
                                    "overlap": olap,
                                    "ratio": ratio,
                                    "heuristic": heuristic,
                                    "penalty": penalty,
                                    "trial": trial,
                                }
                            )
    return jobs


def run_suite(
    spec: SuiteSpec, workers: int = 1, progress=None
) -> tuple[list[TrialRecord], dict]:
    """Run every trial of the suite; returns (records, aggregates).

    ``workers`` > 1 runs trials in a process pool; results are merged in
    trial-index order, so the output is independent of the pool size.
    Per-trial failures are recorded, never raised.
    """
    jobs = _jobs(spec)
    records: list[TrialRecord] = []
    if workers <= 1:
        for i, job in enumerate(jobs):
            records.append(_run_trial(job))
            if progress:
                progress(i + 1, len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, rec in enumerate(pool.map(_run_trial, jobs, chunksize=4)):
                records.append(rec)
                if progress:
                    progress(i + 1, len(jobs))
    return records, aggregate(spec, records)


def aggregate(spec: SuiteSpec, records: list[TrialRecord]) -> dict:
    """Per-cell success/cost aggregates plus paired heuristic comparison.

    Execution costs are only compared over instances solved by every variant
    in the comparison (paired design; avoids survivorship bias).
    """
    cells: dict = {}
    for rec in records:
        key = (rec.n, rec.overlap_target, rec.ratio, rec.heuristic, rec.penalty)
        cells.setdefault(key, []).append(rec)
    cell_out = []
    for key in sorted(cells, key=str):
        recs = cells[key]
        solved = [r for r in recs if r.outcome == "solved"]
        costs = sorted(r.exec_cost for r in solved if r.exec_cost is not None)
        cell_out.append(
            {
                "n": key[0],
                "overlap": key[1],
                "ratio": key[2],
                "heuristic": key[3],
                "penalty": key[4],
                "trials": len(recs),
                "success_rate": len(solved) / len(recs),
                "mean_exec_cost": (sum(costs) / len(costs)) if costs else None,
                "median_exec_cost": (costs[len(costs) // 2]) if costs else None,
                # Aborted searches stop at a wall-clock-dependent point, so
                # the expansion average covers completed searches only.
                "mean_expansions": (
                    sum(r.expansions_fwd + r.expansions_bwd for r in solved)
                    / len(solved)
                )
                if solved
                else None,
            }
        )

    # Paired Greedy-vs-Hungarian execution cost over mutually solved trials.
    paired = []
    if "hungarian" in spec.heuristics and "greedy" in spec.heuristics:
        for penalty in spec.penalties:
            by_instance: dict = {}
            for rec in records:
                if rec.penalty != penalty or rec.outcome != "solved":
                    continue
                by_instance.setdefault(rec.instance_id, {})[rec.heuristic] = rec
            for ratio in spec.ratios:
                both = [
                    v
                    for k, v in sorted(by_instance.items())
                    if "hungarian" in v
                    and "greedy" in v
                    and v["hungarian"].ratio == ratio
                ]
                if not both:
                    continue
                paired.append(
                    {
                        "ratio": ratio,
                        "penalty": penalty,
                        "instances": len(both),
                        "mean_cost_hungarian": sum(
                            v["hungarian"].exec_cost for v in both
                        )
                        / len(both),
                        "mean_cost_greedy": sum(v["greedy"].exec_cost for v in both)
                        / len(both),
                    }
                )
    return {
        "suite": {
            "sizes": list(spec.sizes),
            "overlaps": list(spec.overlaps),
            "ratios": list(spec.ratios),
            "trials": spec.trials,
            "timeout_s": spec.timeout_s,
            "heuristics": list(spec.heuristics),
            "penalties": list(spec.penalties),
            "seed": spec.seed,
            "cost_aggregation": "paired over mutually solved instances",
        },
        "cells": cell_out,
        "paired_cost_comparison": paired,
    }


def write_records_csv(records: list[TrialRecord], path: str) -> None:
    """Deterministic per-trial CSV (no wall-clock columns)."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            row = {f: getattr(rec, f) for f in CSV_FIELDS}
            row["penalty"] = int(rec.penalty)
            row["fallback_engaged"] = int(rec.fallback_engaged)
            if rec.outcome != "solved":
                # How far an aborted search got depends on wall-clock speed;
                # only completed searches have reproducible counters.
                row["expansions_fwd"] = ""
                row["expansions_bwd"] = ""
                row["fallback_engaged"] = ""
            row["replay_ok"] = "" if rec.replay_ok is None else int(rec.replay_ok)
            row["macro_len"] = "" if rec.macro_len is None else rec.macro_len
            row["exec_cost"] = "" if rec.exec_cost is None else repr(rec.exec_cost)
            row["overlap_achieved"] = repr(rec.overlap_achieved)
            writer.writerow(row)


def write_timings_csv(records: list[TrialRecord], path: str) -> None:
    """Wall-clock sidecar; excluded from the determinism guarantee."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TIMING_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow(
                {
                    "instance_id": rec.instance_id,
                    "heuristic": rec.heuristic,
                    "penalty": int(rec.penalty),
                    "plan_wall_s": f"{rec.plan_wall_s:.6f}",
                    "refine_wall_s": f"{rec.refine_wall_s:.6f}",
                }
            )


def write_aggregate_json(aggregates: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(aggregates, fh, indent=2, sort_keys=True)
        fh.write("\n")
