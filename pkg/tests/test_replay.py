"""Independent plan validation tests, including injected faults."""
import dataclasses

import numpy as np

from modlattice.lattice import Configuration, ModuleType
from modlattice.macro_planner import Relocation, plan_bidirectional
from modlattice.motion import (
    CostTable,
    Pick,
    Place,
    Trajectory,
    refine,
)
from modlattice.replay import replay

from oracles import random_typed_polycube, scramble

B = ModuleType.BASE


def cfg_of(cells, t=B):
    return Configuration({c: t for c in cells})


def cfg_from_state(state):
    return Configuration({c: ModuleType.from_name(t) for c, t in state})


def make_plan(ini, goal, start=None):
    out = plan_bidirectional(ini, goal)
    assert out.solved
    return refine(ini, out.plan, start or min(ini.cells()))


def test_replay_accepts_planner_output_fuzz():
    rng = np.random.default_rng(41)
    for _ in range(30):
        n = int(rng.integers(4, 14))
        ini_s = random_typed_polycube(n, rng)
        goal_s = scramble(ini_s, int(rng.integers(1, 4)), rng)
        ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
        exe = make_plan(ini, goal)
        verdict = replay(ini, goal, exe)
        assert verdict, verdict.message


def test_replay_accepts_final_leg():
    cfg = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    out = plan_bidirectional(cfg, cfg)
    exe = refine(cfg, out.plan, (0, 0, 0), goal_stance=(2, 0, 0))
    assert replay(cfg, cfg, exe)


def test_replay_detects_tampered_target():
    ini = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    goal = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)])
    exe = make_plan(ini, goal)
    r, traj = exe.pairs[0]
    moved = Relocation(r.src, (9, 9, 9), r.module_type)
    actions = tuple(
        Place(at=(9, 9, 9)) if isinstance(a, Place) else a for a in traj.actions
    )
    exe.pairs[0] = (moved, Trajectory(actions=actions, cost=traj.cost))
    verdict = replay(ini, goal, exe)
    assert not verdict
    assert "reach" in verdict.message or "addable" in verdict.message


def test_replay_detects_cost_mismatch():
    ini = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    goal = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)])
    exe = make_plan(ini, goal)
    r, traj = exe.pairs[0]
    exe.pairs[0] = (r, Trajectory(actions=traj.actions, cost=traj.cost + 1.0))
    verdict = replay(ini, goal, exe)
    assert not verdict and "cost mismatch" in verdict.message


def test_replay_detects_wrong_goal():
    ini = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    goal = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)])
    other = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    exe = make_plan(ini, goal)
    verdict = replay(ini, other, exe)
    assert not verdict and "goal" in verdict.message


def test_replay_detects_articulation_pick():
    # Hand-build a plan that picks the middle of a line.
    ini = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    goal = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0)])  # never reached anyway
    r = Relocation((1, 0, 0), (0, 1, 0), B)
    traj = Trajectory(actions=(Pick(at=(1, 0, 0)), Place(at=(0, 1, 0))), cost=6.0)
    exe = dataclasses.replace(
        make_plan(ini, ini), pairs=[(r, traj)], total_cost=6.0, start_stance=(0, 0, 0)
    )
    verdict = replay(ini, goal, exe)
    assert not verdict and "not removable" in verdict.message


def test_replay_detects_bad_start_stance():
    ini = cfg_of([(0, 0, 0), (1, 0, 0)])
    exe = make_plan(ini, ini)
    exe.start_stance = (9, 9, 9)
    verdict = replay(ini, ini, exe)
    assert not verdict and "start stance" in verdict.message


def test_replay_respects_custom_cost_table():
    rng = np.random.default_rng(42)
    ini_s = random_typed_polycube(8, rng)
    goal_s = scramble(ini_s, 2, rng)
    ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
    out = plan_bidirectional(ini, goal)
    costs = CostTable(face=1.5, edge=2.5, pick=4.0, place=5.0)
    exe = refine(ini, out.plan, min(ini.cells()), costs)
    assert replay(ini, goal, exe, costs)
    assert not replay(ini, goal, exe)  # default table prices differently
