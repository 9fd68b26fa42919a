"""Plan a reconfiguration end to end, then validate it independently.

Generates a random 20-module structure, derives a goal with roughly half
the cells in common, searches for a macro plan (which module moves where),
refines it into assembler walk/pick/place trajectories, and hands the
result to the replay checker, which re-simulates every primitive action
under its own rules.
"""
import numpy as np

from modlattice.benchmark import RATIOS, derive_goal, random_connected_config
from modlattice.lattice import overlap
from modlattice.macro_planner import plan_bidirectional
from modlattice.motion import refine
from modlattice.replay import replay


def main():
    rng = np.random.default_rng(7)
    ini = random_connected_config(20, RATIOS["typeC"], rng)
    goal = derive_goal(ini, 0.5, rng)
    print(f"instance: {len(ini)} modules, overlap {overlap(ini, goal):.2f}")

    outcome = plan_bidirectional(ini, goal)
    print(f"macro search: {outcome.kind.value}, "
          f"{outcome.stats.expansions_fwd + outcome.stats.expansions_bwd} expansions")
    if not outcome.solved:
        return
    print(f"macro plan: {len(outcome.plan)} relocations")
    for i, r in enumerate(outcome.plan.steps[:5]):
        print(f"  {i}: move {r.module_type.name} {r.src} -> {r.dst}")
    if len(outcome.plan) > 5:
        print(f"  ... and {len(outcome.plan) - 5} more")

    start = min(ini.cells())
    exe = refine(ini, outcome.plan, start)
    n_actions = sum(len(traj.actions) for _, traj in exe.pairs)
    print(f"refined plan: {n_actions} primitive actions, total cost {exe.total_cost}")

    report = replay(ini, goal, exe)
    print(f"independent replay: {'OK' if report else 'FAILED: ' + report.message}")


if __name__ == "__main__":
    main()
