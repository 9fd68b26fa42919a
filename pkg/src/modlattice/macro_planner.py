"""Bidirectional best-first search over module relocations.

A relocation is the macro-action of picking one removable module and dropping
it on an addable cell.  Two frontiers grow toward each other, one from the
initial structure and one from the goal (relocations are always reversible,
so the state graph is undirected).  Each round expands the direction with the
smaller open queue; the search stops when a state has been closed in both
directions, and the two half-paths are joined.

Visited states are keyed by absolute typed occupancy: the assembler plans in
a fixed world frame and the goal is placed in that frame.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from typing import Mapping

from .heuristics import HeuristicKind, PenaltyConfig, _h
from .lattice import (
    Cell,
    Configuration,
    ModuleType,
    StructureError,
    addable_cells,
    articulation_cells,
    neighbors6,
    removable_cells,
)


class RelocationError(ValueError):
    """A relocation violated a pick/place feasibility check."""


@dataclass(frozen=True)
class Relocation:
    """Move the module of ``module_type`` from ``src`` to ``dst``."""

    src: Cell
    dst: Cell
    module_type: ModuleType

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise RelocationError("relocation source and destination coincide")

    def to_json(self) -> dict:
        return {
            "from": list(self.src),
            "to": list(self.dst),
            "type": self.module_type.value,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Relocation":
        return cls(
            src=tuple(int(v) for v in doc["from"]),
            dst=tuple(int(v) for v in doc["to"]),
            module_type=ModuleType.from_name(doc["type"]),
        )


class CandidateMode(Enum):
    #: Drop only on not-yet-filled goal cells of the matching type.
    TARGETED = "targeted"
    #: Drop anywhere addable near the instance bounding box (staging allowed).
    FULL = "full"


@dataclass(frozen=True)
class SearchLimits:
    timeout_s: float = 60.0
    max_expansions: int = 1_000_000


class OutcomeKind(Enum):
    SOLVED = "solved"
    TIMEOUT = "timeout"
    EXHAUSTED = "exhausted"


@dataclass
class SearchStats:
    expansions_fwd: int = 0
    expansions_bwd: int = 0
    peak_frontier_fwd: int = 0
    peak_frontier_bwd: int = 0
    wall_time_s: float = 0.0
    fallback_engaged: bool = False
    #: Set when the joined plan's g_fwd + g_bwd at the meeting state exceeded
    #: the best f seen, i.e. the first-meet join may be suboptimal.
    meet_suboptimal_flag: bool = False

    def to_json(self, include_timing: bool = False) -> dict:
        doc = {
            "expansions_fwd": self.expansions_fwd,
            "expansions_bwd": self.expansions_bwd,
            "peak_frontier_fwd": self.peak_frontier_fwd,
            "peak_frontier_bwd": self.peak_frontier_bwd,
            "fallback_engaged": self.fallback_engaged,
            "meet_suboptimal_flag": self.meet_suboptimal_flag,
        }
        if include_timing:
            doc["wall_time_s"] = self.wall_time_s
        return doc


@dataclass
class MacroPlan:
    steps: list[Relocation]
    ini: Configuration
    goal: Configuration

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class SearchOutcome:
    kind: OutcomeKind
    plan: MacroPlan | None
    stats: SearchStats

    @property
    def solved(self) -> bool:
        return self.kind is OutcomeKind.SOLVED


def invert(r: Relocation) -> Relocation:
    return Relocation(src=r.dst, dst=r.src, module_type=r.module_type)


def apply(cfg: Configuration, r: Relocation) -> Configuration:
    """Apply one relocation, enforcing pick/place feasibility."""
    occ = cfg.occupancy
    if occ.get(r.src) is not r.module_type:
        raise RelocationError(f"no {r.module_type.value} module at {r.src}")
    if r.src not in removable_cells(occ):
        raise RelocationError(f"not removable: {r.src} disconnects the structure")
    rest = dict(occ)
    del rest[r.src]
    if r.dst not in addable_cells(rest):
        raise RelocationError(f"not addable: {r.dst} has no occupied neighbor")
    rest[r.dst] = r.module_type
    return Configuration(rest, validate=False)


def _addable(rest: Mapping[Cell, ModuleType]) -> set[Cell]:
    out: set[Cell] = set()
    for c in rest:
        for n in neighbors6(c):
            if n not in rest:
                out.add(n)
    return out


R_BOX_DEFAULT = 1


def generate_relocations(
    cfg: Configuration | Mapping[Cell, ModuleType],
    direction_target: Configuration | Mapping[Cell, ModuleType],
    mode: CandidateMode = CandidateMode.TARGETED,
    r_box: int = R_BOX_DEFAULT,
) -> list[Relocation]:
    """Enumerate valid relocations of ``cfg`` toward ``direction_target``.

    Targeted mode drops only on unfilled goal cells of the matching type and
    never picks up a correctly placed module.  Full mode drops on any addable
    cell within Chebyshev distance ``r_box`` of the union bounding box, which
    admits the staging moves Targeted cannot express.
    """
    occ = cfg._occ if isinstance(cfg, Configuration) else cfg
    tgt = (
        direction_target._occ
        if isinstance(direction_target, Configuration)
        else direction_target
    )
    removable = sorted(set(occ) - articulation_cells(occ))
    if mode is CandidateMode.FULL:
        cells = list(occ) + list(tgt)
        lo = tuple(min(c[i] for c in cells) - r_box for i in range(3))
        hi = tuple(max(c[i] for c in cells) + r_box for i in range(3))
    else:
        by_type: dict[ModuleType, list[Cell]] = {}
        for c, t in tgt.items():
            if occ.get(c) is not t:
                by_type.setdefault(t, []).append(c)
        for lst in by_type.values():
            lst.sort()
    out: list[Relocation] = []
    for p in removable:
        t = occ[p]
        if mode is CandidateMode.TARGETED and tgt.get(p) is t:
            continue
        rest = dict(occ)
        del rest[p]
        add = _addable(rest)
        if mode is CandidateMode.TARGETED:
            drops = [d for d in by_type.get(t, ()) if d in add and d != p]
        else:
            drops = sorted(
                d
                for d in add
                if d != p
                and all(lo[i] <= d[i] <= hi[i] for i in range(3))
            )
        for d in drops:
            out.append(Relocation(src=p, dst=d, module_type=t))
    return out


_FWD, _BWD = 0, 1


def plan_bidirectional(
    ini: Configuration,
    goal: Configuration,
    kind: HeuristicKind = HeuristicKind.HUNGARIAN,
    penalty: PenaltyConfig | None = None,
    mode: CandidateMode = CandidateMode.TARGETED,
    limits: SearchLimits | None = None,
    r_box: int = R_BOX_DEFAULT,
    auto_fallback: bool = True,
) -> SearchOutcome:
    """Find a macro relocation plan transforming ``ini`` into ``goal``.

    When Targeted mode exhausts without meeting, the search automatically
    restarts in Full mode within the remaining budget (staging moves are
    sometimes necessary; Targeted trades completeness for branching).
    """
    penalty = penalty or PenaltyConfig.disabled()
    limits = limits or SearchLimits()
    if ini.type_counts() != goal.type_counts():
        raise StructureError("non-conservative instance: type multisets differ")
    t0 = time.perf_counter()
    outcome = _search(ini, goal, kind, penalty, mode, limits, r_box, t0)
    if (
        outcome.kind is OutcomeKind.EXHAUSTED
        and mode is CandidateMode.TARGETED
        and auto_fallback
    ):
        first = outcome.stats
        outcome = _search(ini, goal, kind, penalty, CandidateMode.FULL, limits, r_box, t0)
        outcome.stats.expansions_fwd += first.expansions_fwd
        outcome.stats.expansions_bwd += first.expansions_bwd
        outcome.stats.fallback_engaged = True
    outcome.stats.wall_time_s = time.perf_counter() - t0
    return outcome


def _search(
    ini: Configuration,
    goal: Configuration,
    kind: HeuristicKind,
    penalty: PenaltyConfig,
    mode: CandidateMode,
    limits: SearchLimits,
    r_box: int,
    t0: float,
) -> SearchOutcome:
    stats = SearchStats()
    ini_occ, goal_occ = ini.occupancy, goal.occupancy
    ini_key, goal_key = frozenset(ini_occ.items()), frozenset(goal_occ.items())
    if ini_key == goal_key:
        return SearchOutcome(OutcomeKind.SOLVED, MacroPlan([], ini, goal), stats)

    targets = (goal_occ, ini_occ)
    occ_by_key = ({ini_key: ini_occ}, {goal_key: goal_occ})
    g_best: tuple[dict, dict] = ({ini_key: 0}, {goal_key: 0})
    closed: tuple[set, set] = (set(), set())
    parents: tuple[dict, dict] = ({ini_key: None}, {goal_key: None})
    heaps: tuple[list, list] = ([], [])
    counter = itertools.count()
    best_f_seen = 0.0

    for d in (_FWD, _BWD):
        key = (ini_key, goal_key)[d]
        h0 = _h(occ_by_key[d][key], targets[d], penalty, kind)
        heappush(heaps[d], (h0, h0, next(counter), 0, key))

    expansions = 0
    while heaps[_FWD] and heaps[_BWD]:
        if time.perf_counter() - t0 > limits.timeout_s:
            return SearchOutcome(OutcomeKind.TIMEOUT, None, stats)
        if expansions >= limits.max_expansions:
            return SearchOutcome(OutcomeKind.TIMEOUT, None, stats)
        d = _FWD if len(heaps[_FWD]) <= len(heaps[_BWD]) else _BWD
        f, h, _, g, key = heappop(heaps[d])
        if g > g_best[d].get(key, float("inf")):
            continue  # stale entry
        closed[d].add(key)
        if f > best_f_seen:
            best_f_seen = f
        if key in closed[1 - d]:
            plan = _join(key, parents, occ_by_key, ini, goal)
            if g_best[_FWD][key] + g_best[_BWD][key] > best_f_seen + 1e-9:
                stats.meet_suboptimal_flag = True
            return SearchOutcome(OutcomeKind.SOLVED, plan, stats)
        expansions += 1
        if d == _FWD:
            stats.expansions_fwd += 1
        else:
            stats.expansions_bwd += 1
        occ = occ_by_key[d][key]
        for r in generate_relocations(occ, targets[d], mode, r_box):
            new_occ = dict(occ)
            del new_occ[r.src]
            new_occ[r.dst] = r.module_type
            new_key = frozenset(new_occ.items())
            g2 = g + 1
            if g2 >= g_best[d].get(new_key, float("inf")):
                continue
            g_best[d][new_key] = g2
            occ_by_key[d][new_key] = new_occ
            parents[d][new_key] = (key, r)
            h2 = _h(new_occ, targets[d], penalty, kind)
            heappush(heaps[d], (g2 + h2, h2, next(counter), g2, new_key))
        for dd in (_FWD, _BWD):
            peak = len(heaps[dd])
            if dd == _FWD and peak > stats.peak_frontier_fwd:
                stats.peak_frontier_fwd = peak
            if dd == _BWD and peak > stats.peak_frontier_bwd:
                stats.peak_frontier_bwd = peak
    return SearchOutcome(OutcomeKind.EXHAUSTED, None, stats)


def _join(meet_key, parents, occ_by_key, ini, goal) -> MacroPlan:
    fwd: list[Relocation] = []
    node = meet_key
    while parents[_FWD][node] is not None:
        node, r = parents[_FWD][node]
        fwd.append(r)
    fwd.reverse()
    bwd: list[Relocation] = []
    node = meet_key
    while parents[_BWD][node] is not None:
        node, r = parents[_BWD][node]
        bwd.append(r)
    # Backward relocations lead from the goal toward the meeting state; the
    # forward continuation undoes them in order.
    steps = fwd + [invert(r) for r in bwd]
    return MacroPlan(steps, ini, goal)


def macro_plan_to_json(plan: MacroPlan, stats: SearchStats | None = None) -> dict:
    doc = {"steps": [r.to_json() for r in plan.steps]}
    if stats is not None:
        doc["stats"] = stats.to_json()
    return doc


def validate_macro_plan(plan: MacroPlan) -> None:
    """Replay the macro steps, checking feasibility and goal attainment."""
    cfg = plan.ini
    for i, r in enumerate(plan.steps):
        try:
            cfg = apply(cfg, r)
        except RelocationError as e:
            raise RelocationError(f"step {i}: {e}") from e
    if cfg.key() != plan.goal.key():
        raise RelocationError("macro plan does not reach the goal configuration")
