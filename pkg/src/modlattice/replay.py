"""Primitive-by-primitive re-execution of an executable plan.

The checker replays a plan against the initial configuration with no help
from the planners that produced it, reporting the first violated invariant:
stance legality of every step, reach and removability at every pick,
addability at every place, structural connectivity throughout, and goal
attainment at the end.  It backs the ``replay`` CLI subcommand so third
parties can validate plan files.
"""
from __future__ import annotations

from dataclasses import dataclass

from .lattice import (
    Configuration,
    ModuleType,
    is_connected,
    neighbors6,
    removable_cells,
)
from .motion import (
    CostTable,
    ExecutablePlan,
    Pick,
    Place,
    R_REACH_DEFAULT,
    Step,
    StepKind,
    _in_reach,
    stance_moves,
)


@dataclass
class ReplayResult:
    ok: bool
    message: str
    step_index: int | None = None  # index of the offending relocation, if any

    def __bool__(self) -> bool:
        return self.ok


def replay(
    ini: Configuration,
    goal: Configuration,
    plan: ExecutablePlan,
    costs: CostTable | None = None,
    r_reach: int = R_REACH_DEFAULT,
    leaf_only: bool = False,
) -> ReplayResult:
    costs = costs or CostTable()
    occ = ini.occupancy
    stance = plan.start_stance
    if stance not in occ:
        return ReplayResult(False, f"start stance {stance} not occupied")
    held: ModuleType | None = None
    total = 0.0
    for k, (r, traj) in enumerate(plan.pairs):
        cost = 0.0
        for a in traj.actions:
            if isinstance(a, Step):
                legal = dict(stance_moves(occ, stance))
                if a.to not in legal or legal[a.to] is not a.kind:
                    return ReplayResult(
                        False, f"illegal {a.kind.value} step to {a.to} at step {k}", k
                    )
                cost += costs.face if a.kind is StepKind.FACE else costs.edge
                stance = a.to
            elif isinstance(a, Pick):
                if held is not None:
                    return ReplayResult(False, f"pick while holding at step {k}", k)
                if a.at != r.src:
                    return ReplayResult(False, f"pick at {a.at} != relocation source at step {k}", k)
                if a.at == stance:
                    return ReplayResult(False, f"cannot pick the stance cell at step {k}", k)
                if not _in_reach(stance, a.at, r_reach):
                    return ReplayResult(False, f"pick out of reach at step {k}", k)
                if a.at not in occ:
                    return ReplayResult(False, f"pick at unoccupied {a.at} at step {k}", k)
                if a.at not in removable_cells(occ, leaf_only=leaf_only):
                    return ReplayResult(False, f"not removable at step {k}", k)
                held = occ.pop(a.at)
                cost += costs.pick
                if not is_connected(occ):
                    return ReplayResult(False, f"structure disconnected after pick at step {k}", k)
            elif isinstance(a, Place):
                if held is None:
                    return ReplayResult(False, f"place with empty gripper at step {k}", k)
                if a.at != r.dst:
                    return ReplayResult(False, f"place at {a.at} != relocation target at step {k}", k)
                if not _in_reach(stance, a.at, r_reach):
                    return ReplayResult(False, f"place out of reach at step {k}", k)
                if a.at in occ:
                    return ReplayResult(False, f"place on occupied {a.at} at step {k}", k)
                if not any(n in occ for n in neighbors6(a.at)):
                    return ReplayResult(False, f"not addable at step {k}", k)
                occ[a.at] = held
                held = None
                cost += costs.place
                continue
            else:
                return ReplayResult(False, f"unknown action at step {k}", k)
        if held is not None:
            return ReplayResult(False, f"relocation {k} ended while still holding a module", k)
        if abs(cost - traj.cost) > 1e-9:
            return ReplayResult(
                False, f"trajectory cost mismatch at step {k}: {cost} != {traj.cost}", k
            )
        total += cost
    if plan.final_leg is not None:
        for a in plan.final_leg.actions:
            if not isinstance(a, Step):
                return ReplayResult(False, "final leg may only contain steps")
            legal = dict(stance_moves(occ, stance))
            if a.to not in legal or legal[a.to] is not a.kind:
                return ReplayResult(False, f"illegal final-leg step to {a.to}")
            total += costs.face if a.kind is StepKind.FACE else costs.edge
            stance = a.to
    if abs(total - plan.total_cost) > 1e-9:
        return ReplayResult(False, f"total cost mismatch: {total} != {plan.total_cost}")
    if frozenset(occ.items()) != goal.key():
        return ReplayResult(False, "final configuration does not match the goal")
    return ReplayResult(True, "plan replays cleanly")
