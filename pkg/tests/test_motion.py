"""Assembler motion planning tests against a Dijkstra oracle."""
import numpy as np
import pytest

from modlattice.lattice import Configuration, ModuleType
from modlattice.macro_planner import MacroPlan, Relocation, plan_bidirectional
from modlattice.motion import (
    CostTable,
    MotionError,
    Phase,
    Pick,
    Place,
    Step,
    StepKind,
    astar_robot,
    executable_plan_from_json,
    executable_plan_to_json,
    reach_set,
    refine,
    stance_moves,
    task_poses,
)

from oracles import random_typed_polycube, scramble, stance_cost_oracle

B = ModuleType.BASE


def cfg_of(cells, t=B):
    return Configuration({c: t for c in cells})


def cfg_from_state(state):
    return Configuration({c: ModuleType.from_name(t) for c, t in state})


LINE4 = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0)])
LTROMINO = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0)])


def test_stance_moves_line_end():
    moves = stance_moves(LINE4, (0, 0, 0))
    assert moves == [((1, 0, 0), StepKind.FACE)]


def test_stance_moves_l_corner():
    moves = stance_moves(LTROMINO, (1, 0, 0))
    kinds = {m for m in moves}
    assert ((0, 0, 0), StepKind.FACE) in kinds
    assert ((1, 1, 0), StepKind.FACE) in kinds


def test_stance_moves_edge_requires_free_corner():
    # Diagonal neighbors are steppable only around an unoccupied corner.
    diag = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)])
    moves = dict(stance_moves(diag, (0, 0, 0)))
    # (1,1,0) is edge-adjacent but both shared corners are occupied.
    assert (1, 1, 0) not in moves
    open_l = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    moves = dict(stance_moves(open_l, (0, 0, 0)))
    assert moves.get((1, 1, 0)) is StepKind.EDGE


def test_reach_set_size_and_members():
    r = reach_set((0, 0, 0))
    assert len(r) == 24  # 6 at distance 1 plus 18 at distance 2
    assert (0, 0, 0) not in r
    assert all(n in r for n in [(1, 0, 0), (-1, 0, 0), (0, 0, 2), (1, 1, 0)])


def test_task_poses_three_line():
    cfg = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    r = Relocation((0, 0, 0), (2, 1, 0), B)
    assert task_poses(cfg, r, Phase.PICK) == {(1, 0, 0), (2, 0, 0)}
    rest = cfg_of([(1, 0, 0), (2, 0, 0)])
    places = task_poses(rest, r, Phase.PLACE)
    assert r.dst not in places
    assert places == {(1, 0, 0), (2, 0, 0)}


def test_task_poses_empty_errors():
    # A singleton remainder offers no stance: the robot would stand on the
    # picked module itself.
    pair = Configuration({(0, 0, 0): B, (1, 0, 0): B})
    r = Relocation((1, 0, 0), (0, 1, 0), B)
    assert task_poses(pair, r, Phase.PICK) == {(0, 0, 0)}
    with pytest.raises(MotionError, match="unreachable"):
        far = Relocation((0, 0, 0), (9, 9, 9), B)
        task_poses(cfg_of([(9, 9, 9), (9, 9, 8)]), far, Phase.PICK, r_reach=1)


def test_astar_trivial_and_line():
    assert astar_robot(LINE4, (0, 0, 0), {(0, 0, 0)}).cost == 0.0
    traj = astar_robot(LINE4, (0, 0, 0), {(3, 0, 0)})
    assert traj.cost == 3.0
    assert len(traj.actions) == 3
    assert all(isinstance(a, Step) for a in traj.actions)


def test_astar_l_tromino_through_corner():
    tall = cfg_of([(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    traj = astar_robot(tall, (0, 0, 0), {(1, 1, 0)})
    assert traj.cost == 2.0


def test_astar_matches_dijkstra_oracle():
    rng = np.random.default_rng(31)
    for _ in range(50):
        n = int(rng.integers(2, 21))
        state = random_typed_polycube(n, rng)
        cells = sorted(c for c, _ in state)
        occ = {c: B for c in cells}
        start = cells[int(rng.integers(len(cells)))]
        goal = cells[int(rng.integers(len(cells)))]
        expected = stance_cost_oracle(cells, start, {goal})
        traj = astar_robot(occ, start, {goal})
        assert traj.cost == expected


def test_astar_heuristic_admissible_odd_costs():
    # Exactness must survive a cost table where edge steps are cheap.
    costs = CostTable(face=2.0, edge=1.0, pick=0.0, place=0.0)
    rng = np.random.default_rng(32)
    for _ in range(30):
        n = int(rng.integers(2, 15))
        state = random_typed_polycube(n, rng)
        cells = sorted(c for c, _ in state)
        start = cells[0]
        goal = cells[-1]
        expected = stance_cost_oracle(cells, start, {goal}, face_cost=2.0, edge_cost=1.0)
        assert astar_robot({c: B for c in cells}, start, {goal}, costs).cost == expected


def test_astar_disconnected_stances_error():
    with pytest.raises(MotionError, match="stance graph"):
        # Two cells touching only at a corner with both swing cells missing
        # cannot be walked between.
        astar_robot(
            {(0, 0, 0): B, (1, 1, 1): B},  # not face- or edge-adjacent
            (0, 0, 0),
            {(1, 1, 1)},
        )


def test_refine_empty_plan():
    plan = MacroPlan([], LINE4, LINE4)
    exe = refine(LINE4, plan, (0, 0, 0))
    assert exe.pairs == [] and exe.total_cost == 0.0


def test_refine_single_relocation_joint_minimum():
    # Exhaustively price every stance pair and compare.
    cfg = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    r = Relocation((0, 0, 0), (2, 1, 0), B)
    plan = MacroPlan([r], cfg, cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)]))
    costs = CostTable()
    exe = refine(cfg, plan, (1, 0, 0), costs)
    cells = [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    rest = [(1, 0, 0), (2, 0, 0)]
    best = None
    for p1 in [(1, 0, 0), (2, 0, 0)]:
        d1 = stance_cost_oracle(cells, (1, 0, 0), {p1})
        for p2 in rest:
            d2 = stance_cost_oracle(rest, p1, {p2})
            j = d1 + costs.pick + d2 + costs.place
            best = j if best is None else min(best, j)
    assert exe.total_cost == best
    ops = [type(a) for a in exe.pairs[0][1].actions]
    assert Pick in ops and Place in ops


def test_refine_cost_monotone_in_cost_table():
    rng = np.random.default_rng(33)
    for _ in range(10):
        n = int(rng.integers(5, 12))
        ini_s = random_typed_polycube(n, rng)
        goal_s = scramble(ini_s, 2, rng)
        ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
        out = plan_bidirectional(ini, goal)
        assert out.solved
        start = min(ini.cells())
        base = refine(ini, out.plan, start, CostTable()).total_cost
        doubled = refine(
            ini, out.plan, start, CostTable(face=2, edge=4, pick=6, place=6)
        ).total_cost
        assert doubled >= base


def test_refine_goal_stance_final_leg():
    cfg = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    plan = MacroPlan([], cfg, cfg)
    exe = refine(cfg, plan, (0, 0, 0), goal_stance=(2, 0, 0))
    assert exe.final_leg is not None
    assert exe.total_cost == exe.final_leg.cost == 2.0


def test_executable_plan_json_round_trip():
    cfg = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
    goal = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)])
    out = plan_bidirectional(cfg, goal)
    exe = refine(cfg, out.plan, (1, 0, 0))
    doc = executable_plan_to_json(exe)
    back = executable_plan_from_json(doc)
    assert back.total_cost == exe.total_cost
    assert back.pairs[0][0] == exe.pairs[0][0]
    assert back.pairs[0][1].actions == exe.pairs[0][1].actions
