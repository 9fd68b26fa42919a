"""A* motion pricing of macro relocations for the assembler robot.

The assembler is abstracted as a single-stance cell-crawler: it stands on one
occupied cell and moves between occupied cells that share a face (Face step)
or an edge (Edge step, feasible only when the two cells share an unoccupied
common face-neighbor to swing through).  The Edge step cost stands in for the
pivot maneuver of the physical dual-foot robot.  Pick and place act on cells
within a Manhattan reach radius of the stance.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from typing import Mapping, Sequence

from .lattice import (
    EDGE_OFFSETS,
    Cell,
    Configuration,
    ModuleType,
    StructureError,
    manhattan,
    neighbors6,
)
from .macro_planner import MacroPlan, Relocation, RelocationError


class MotionError(ValueError):
    """Raised when a macro action cannot be priced into robot motion."""


@dataclass(frozen=True)
class CostTable:
    face: float = 1.0
    edge: float = 2.0
    pick: float = 3.0
    place: float = 3.0

    def __post_init__(self) -> None:
        if min(self.face, self.edge, self.pick, self.place) < 0:
            raise ValueError("action costs must be nonnegative")


R_REACH_DEFAULT = 2


class StepKind(Enum):
    FACE = "face"
    EDGE = "edge"


@dataclass(frozen=True)
class Step:
    to: Cell
    kind: StepKind


@dataclass(frozen=True)
class Pick:
    at: Cell


@dataclass(frozen=True)
class Place:
    at: Cell


PrimitiveAction = Step | Pick | Place


@dataclass(frozen=True)
class AssemblerState:
    """Stance cell (must be occupied) plus the optionally held module."""

    stance: Cell
    held: ModuleType | None = None


@dataclass
class Trajectory:
    actions: tuple[PrimitiveAction, ...]
    cost: float

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class ExecutablePlan:
    """Macro plan priced into per-relocation assembler trajectories.

    ``final_leg`` is the optional repositioning walk to a required goal
    stance; it carries no relocation but is included in ``total_cost``.
    """

    pairs: list[tuple[Relocation, Trajectory]]
    total_cost: float
    start_stance: Cell
    final_leg: Trajectory | None = None


class Phase(Enum):
    PICK = "pick"
    PLACE = "place"


def _occ(cfg) -> Mapping[Cell, ModuleType]:
    return cfg._occ if isinstance(cfg, Configuration) else cfg


def stance_moves(
    cfg: Configuration | Mapping[Cell, ModuleType], s: Cell
) -> list[tuple[Cell, StepKind]]:
    """Legal single steps from stance ``s``: face neighbors, then edge
    neighbors reachable around an unoccupied corner."""
    occ = _occ(cfg)
    if s not in occ:
        raise MotionError(f"stance {s} is not occupied")
    moves: list[tuple[Cell, StepKind]] = []
    for n in neighbors6(s):
        if n in occ:
            moves.append((n, StepKind.FACE))
    for off in EDGE_OFFSETS:
        e = (s[0] + off[0], s[1] + off[1], s[2] + off[2])
        if e not in occ:
            continue
        # The two cells face-adjacent to both s and e; at least one must be
        # free for the robot to swing through the corner.
        corners = []
        for i in range(3):
            if off[i] != 0:
                c = list(s)
                c[i] += off[i]
                corners.append(tuple(c))
        if any(c not in occ for c in corners):
            moves.append((e, StepKind.EDGE))
    return moves


def reach_set(s: Cell, r_reach: int = R_REACH_DEFAULT) -> set[Cell]:
    """All cells at Manhattan distance 1..r_reach from the stance."""
    out: set[Cell] = set()
    for dx in range(-r_reach, r_reach + 1):
        for dy in range(-r_reach, r_reach + 1):
            for dz in range(-r_reach, r_reach + 1):
                d = abs(dx) + abs(dy) + abs(dz)
                if 1 <= d <= r_reach:
                    out.add((s[0] + dx, s[1] + dy, s[2] + dz))
    return out


def _in_reach(s: Cell, c: Cell, r_reach: int) -> bool:
    return 1 <= manhattan(s, c) <= r_reach


def task_poses(
    cfg: Configuration | Mapping[Cell, ModuleType],
    r: Relocation,
    phase: Phase,
    r_reach: int = R_REACH_DEFAULT,
) -> set[Cell]:
    """Stances from which the pick (resp. place) of ``r`` can be executed.

    For the pick phase, ``cfg`` is the configuration before the pick; for the
    place phase it is the configuration after the pick (source vacated).
    """
    occ = _occ(cfg)
    if phase is Phase.PICK:
        poses = {
            s for s in occ if s != r.src and _in_reach(s, r.src, r_reach)
        }
    else:
        poses = {
            s for s in occ if s != r.dst and _in_reach(s, r.dst, r_reach)
        }
    if not poses:
        raise MotionError(
            f"unreachable macro-action: no stance within reach {r_reach} for {phase.value}"
        )
    return poses


def _h_scale(costs: CostTable) -> float:
    # One face step changes Manhattan distance by 1, one edge step by at most
    # 2; min(face, edge)/2 per unit keeps the estimate admissible for any
    # cost table.
    return min(costs.face, costs.edge) / 2.0


def astar_robot(
    cfg: Configuration | Mapping[Cell, ModuleType],
    start: AssemblerState | Cell,
    goals: set[Cell] | Sequence[Cell],
    costs: CostTable | None = None,
) -> Trajectory:
    """Minimum-cost stance walk from ``start`` to any goal stance."""
    occ = _occ(cfg)
    costs = costs or CostTable()
    s0 = start.stance if isinstance(start, AssemblerState) else start
    if s0 not in occ:
        raise MotionError(f"start stance {s0} is not occupied")
    goal_set = set(goals)
    if not goal_set:
        raise MotionError("no goal stances")
    for g in goal_set:
        if g not in occ:
            raise MotionError(f"goal stance {g} is not occupied")
    if s0 in goal_set:
        return Trajectory(actions=(), cost=0.0)
    scale = _h_scale(costs)

    def h(c: Cell) -> float:
        return scale * min(manhattan(c, g) for g in goal_set)

    dist: dict[Cell, float] = {s0: 0.0}
    parent: dict[Cell, tuple[Cell, StepKind]] = {}
    heap: list[tuple[float, float, Cell]] = [(h(s0), 0.0, s0)]
    closed: set[Cell] = set()
    while heap:
        f, g, c = heappop(heap)
        if c in closed:
            continue
        closed.add(c)
        if c in goal_set:
            actions: list[PrimitiveAction] = []
            node = c
            while node != s0:
                p, kind = parent[node]
                actions.append(Step(to=node, kind=kind))
                node = p
            actions.reverse()
            return Trajectory(actions=tuple(actions), cost=g)
        for n, kind in stance_moves(occ, c):
            step = costs.face if kind is StepKind.FACE else costs.edge
            g2 = g + step
            if g2 < dist.get(n, float("inf")) - 1e-12:
                dist[n] = g2
                parent[n] = (c, kind)
                heappush(heap, (g2 + h(n), g2, n))
    raise MotionError("stance graph disconnected: no path to any goal stance")


def _dijkstra(
    occ: Mapping[Cell, ModuleType], source: Cell, costs: CostTable
) -> tuple[dict[Cell, float], dict[Cell, tuple[Cell, StepKind]]]:
    dist: dict[Cell, float] = {source: 0.0}
    parent: dict[Cell, tuple[Cell, StepKind]] = {}
    heap: list[tuple[float, Cell]] = [(0.0, source)]
    closed: set[Cell] = set()
    while heap:
        g, c = heappop(heap)
        if c in closed:
            continue
        closed.add(c)
        for n, kind in stance_moves(occ, c):
            step = costs.face if kind is StepKind.FACE else costs.edge
            g2 = g + step
            if g2 < dist.get(n, float("inf")) - 1e-12:
                dist[n] = g2
                parent[n] = (c, kind)
                heappush(heap, (g2, n))
    return dist, parent


def _path_actions(
    parent: dict[Cell, tuple[Cell, StepKind]], source: Cell, target: Cell
) -> list[PrimitiveAction]:
    actions: list[PrimitiveAction] = []
    node = target
    while node != source:
        p, kind = parent[node]
        actions.append(Step(to=node, kind=kind))
        node = p
    actions.reverse()
    return actions


def refine(
    ini: Configuration,
    plan: MacroPlan,
    start_stance: Cell,
    costs: CostTable | None = None,
    r_reach: int = R_REACH_DEFAULT,
    goal_stance: Cell | None = None,
) -> ExecutablePlan:
    """Price every macro relocation into an assembler trajectory.

    For each relocation the (pick-stance, place-stance) pair is chosen
    jointly to minimize walk + pick + walk + place cost; ties break toward
    the canonically smaller stance pair.  The robot stance carries over
    between relocations; the structure used for walking is always the
    current physical one (post-place of the previous step, post-pick within
    a step).
    """
    costs = costs or CostTable()
    occ = ini.occupancy
    if start_stance not in occ:
        raise MotionError(f"start stance {start_stance} is not occupied")
    stance = start_stance
    pairs: list[tuple[Relocation, Trajectory]] = []
    total = 0.0
    for r in plan.steps:
        if occ.get(r.src) is not r.module_type:
            raise RelocationError(f"no {r.module_type.value} module at {r.src}")
        picks = sorted(task_poses(occ, r, Phase.PICK, r_reach))
        rest = dict(occ)
        del rest[r.src]
        places = sorted(task_poses(rest, r, Phase.PLACE, r_reach))
        dist1, par1 = _dijkstra(occ, stance, costs)
        best: tuple[float, Cell, Cell] | None = None
        best_par2: dict[Cell, tuple[Cell, StepKind]] | None = None
        for p1 in picks:
            d1 = dist1.get(p1)
            if d1 is None:
                continue
            if best is not None and d1 + costs.pick + costs.place > best[0]:
                # Even a zero-length place walk cannot beat the incumbent.
                continue
            dist2, par2 = _dijkstra(rest, p1, costs)
            for p2 in places:
                d2 = dist2.get(p2)
                if d2 is None:
                    continue
                j = d1 + costs.pick + d2 + costs.place
                cand = (j, p1, p2)
                if best is None or cand < best:
                    best = cand
                    best_par2 = par2
        if best is None or best_par2 is None:
            raise MotionError("unreachable macro-action: no feasible stance pair")
        j, p1, p2 = best
        actions: list[PrimitiveAction] = []
        actions.extend(_path_actions(par1, stance, p1))
        actions.append(Pick(at=r.src))
        actions.extend(_path_actions(best_par2, p1, p2))
        actions.append(Place(at=r.dst))
        traj = Trajectory(actions=tuple(actions), cost=j)
        pairs.append((r, traj))
        total += j
        rest[r.dst] = r.module_type
        occ = rest
        stance = p2
    final_leg: Trajectory | None = None
    if goal_stance is not None:
        final_leg = astar_robot(occ, stance, {goal_stance}, costs)
        total += final_leg.cost
    return ExecutablePlan(
        pairs=pairs, total_cost=total, start_stance=start_stance, final_leg=final_leg
    )


# --- JSON interchange -------------------------------------------------------


def _action_to_json(a: PrimitiveAction) -> dict:
    if isinstance(a, Step):
        return {"op": "step", "to": list(a.to), "kind": a.kind.value}
    if isinstance(a, Pick):
        return {"op": "pick", "at": list(a.at)}
    return {"op": "place", "at": list(a.at)}


def _action_from_json(doc: dict) -> PrimitiveAction:
    op = doc.get("op")
    if op == "step":
        return Step(to=tuple(int(v) for v in doc["to"]), kind=StepKind(doc["kind"]))
    if op == "pick":
        return Pick(at=tuple(int(v) for v in doc["at"]))
    if op == "place":
        return Place(at=tuple(int(v) for v in doc["at"]))
    raise StructureError(f"unknown primitive action {op!r}")


def executable_plan_to_json(plan: ExecutablePlan, stats=None) -> dict:
    steps = []
    for r, traj in plan.pairs:
        entry = r.to_json()
        entry["trajectory"] = [_action_to_json(a) for a in traj.actions]
        entry["cost"] = traj.cost
        steps.append(entry)
    doc = {
        "steps": steps,
        "total_cost": plan.total_cost,
        "start_stance": list(plan.start_stance),
    }
    if plan.final_leg is not None:
        doc["final_leg"] = {
            "trajectory": [_action_to_json(a) for a in plan.final_leg.actions],
            "cost": plan.final_leg.cost,
        }
    if stats is not None:
        doc["stats"] = stats.to_json()
    return doc


def executable_plan_from_json(doc: dict) -> ExecutablePlan:
    pairs: list[tuple[Relocation, Trajectory]] = []
    for entry in doc["steps"]:
        r = Relocation.from_json(entry)
        actions = tuple(_action_from_json(a) for a in entry.get("trajectory", ()))
        pairs.append((r, Trajectory(actions=actions, cost=float(entry["cost"]))))
    final_leg = None
    if "final_leg" in doc:
        final_leg = Trajectory(
            actions=tuple(_action_from_json(a) for a in doc["final_leg"]["trajectory"]),
            cost=float(doc["final_leg"]["cost"]),
        )
    return ExecutablePlan(
        pairs=pairs,
        total_cost=float(doc["total_cost"]),
        start_stance=tuple(int(v) for v in doc["start_stance"]),
        final_leg=final_leg,
    )
