"""Bidirectional macro search tests against a brute-force move oracle."""
import numpy as np
import pytest

from modlattice.heuristics import HeuristicKind, PenaltyConfig
from modlattice.lattice import Configuration, ModuleType
from modlattice.macro_planner import (
    CandidateMode,
    OutcomeKind,
    Relocation,
    RelocationError,
    SearchLimits,
    apply,
    generate_relocations,
    invert,
    macro_plan_to_json,
    plan_bidirectional,
    validate_macro_plan,
)

from oracles import optimal_macro_length, random_typed_polycube, scramble, successors

B = ModuleType.BASE


def cfg_of(cells, t=B):
    return Configuration({c: t for c in cells})


def cfg_from_state(state):
    return Configuration({c: ModuleType.from_name(t) for c, t in state})


LINE3 = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
LTROMINO = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0)])


def test_apply_valid_move():
    out = apply(LINE3, Relocation((0, 0, 0), (2, 1, 0), B))
    assert set(out.cells()) == {(1, 0, 0), (2, 0, 0), (2, 1, 0)}


def test_apply_rejects_cut_vertex_pick():
    with pytest.raises(RelocationError, match="not removable"):
        apply(LINE3, Relocation((1, 0, 0), (0, 1, 0), B))


def test_apply_rejects_floating_drop():
    with pytest.raises(RelocationError, match="not addable"):
        apply(LINE3, Relocation((0, 0, 0), (5, 5, 5), B))


def test_apply_rejects_wrong_type():
    with pytest.raises(RelocationError, match="no Joint"):
        apply(LINE3, Relocation((0, 0, 0), (2, 1, 0), ModuleType.JOINT))


def test_relocation_requires_distinct_cells():
    with pytest.raises(RelocationError):
        Relocation((0, 0, 0), (0, 0, 0), B)


def test_invert_round_trip():
    r = Relocation((0, 0, 0), (2, 1, 0), B)
    assert invert(r) == Relocation((2, 1, 0), (0, 0, 0), B)
    assert invert(invert(r)) == r


def test_invert_apply_round_trip_fuzz():
    rng = np.random.default_rng(21)
    done = 0
    while done < 100:
        n = int(rng.integers(3, 9))
        state = random_typed_polycube(n, rng)
        cfg = cfg_from_state(state)
        moves = generate_relocations(cfg, cfg, CandidateMode.FULL)
        if not moves:
            continue
        r = moves[int(rng.integers(len(moves)))]
        assert apply(apply(cfg, r), invert(r)).key() == cfg.key()
        done += 1


def test_generate_relocations_empty_at_target():
    assert generate_relocations(LINE3, LINE3, CandidateMode.TARGETED) == []


def test_generate_relocations_shifted_line():
    target = cfg_of([(1, 0, 0), (2, 0, 0), (3, 0, 0)])
    moves = generate_relocations(LINE3, target, CandidateMode.TARGETED)
    # Only end cells are removable and only (3,0,0) needs filling.
    assert {(r.src, r.dst) for r in moves} == {((0, 0, 0), (3, 0, 0))}


def test_targeted_subset_of_full():
    rng = np.random.default_rng(22)
    for _ in range(100):
        n = int(rng.integers(3, 9))
        ini = random_typed_polycube(n, rng)
        goal = scramble(ini, int(rng.integers(1, 4)), rng)
        cfg, tgt = cfg_from_state(ini), cfg_from_state(goal)
        targeted = set(generate_relocations(cfg, tgt, CandidateMode.TARGETED))
        full = set(generate_relocations(cfg, tgt, CandidateMode.FULL))
        assert targeted <= full


def test_full_moves_match_oracle_moves():
    # The planner's Full candidate set and the oracle's move relation must
    # describe the same state graph.
    rng = np.random.default_rng(23)
    for _ in range(30):
        n = int(rng.integers(3, 9))
        state = random_typed_polycube(n, rng)
        cfg = cfg_from_state(state)
        lib = {
            frozenset(apply(cfg, r).occupancy.items()) for r in
            generate_relocations(cfg, cfg, CandidateMode.FULL)
        }
        orc = {
            frozenset((c, ModuleType.from_name(t)) for c, t in s2)
            for s2 in successors(state)
        }
        assert lib == orc


def test_plan_trivial_identity():
    out = plan_bidirectional(LINE3, LINE3)
    assert out.solved and len(out.plan) == 0


def test_plan_line_to_l_tromino():
    out = plan_bidirectional(LINE3, LTROMINO)
    assert out.solved
    assert len(out.plan) == 1
    validate_macro_plan(out.plan)


def test_plan_i_to_s_tetromino():
    ini = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0)])
    goal = cfg_of([(1, 0, 0), (2, 0, 0), (2, 1, 0), (3, 1, 0)])
    opt = optimal_macro_length(
        frozenset((c, "Base") for c in ini.cells()),
        frozenset((c, "Base") for c in goal.cells()),
    )
    out = plan_bidirectional(
        ini, goal, HeuristicKind.HUNGARIAN, PenaltyConfig.disabled(), CandidateMode.FULL
    )
    assert out.solved and len(out.plan) == opt == 2
    validate_macro_plan(out.plan)


def test_plan_intermediate_states_connected_and_conservative():
    rng = np.random.default_rng(24)
    for _ in range(30):
        n = int(rng.integers(4, 10))
        ini_s = random_typed_polycube(n, rng)
        goal_s = scramble(ini_s, int(rng.integers(1, 4)), rng)
        ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
        out = plan_bidirectional(ini, goal)
        assert out.solved
        validate_macro_plan(out.plan)  # checks connectivity plus goal


def test_plan_symmetry_fuzz():
    rng = np.random.default_rng(25)
    for _ in range(20):
        n = int(rng.integers(4, 9))
        ini_s = random_typed_polycube(n, rng)
        goal_s = scramble(ini_s, int(rng.integers(1, 4)), rng)
        ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
        fwd = plan_bidirectional(ini, goal)
        rev = plan_bidirectional(goal, ini)
        assert fwd.solved == rev.solved


def test_plan_determinism():
    rng = np.random.default_rng(26)
    ini_s = random_typed_polycube(10, rng)
    goal_s = scramble(ini_s, 4, rng)
    ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
    a = plan_bidirectional(ini, goal)
    b = plan_bidirectional(ini, goal)
    assert a.solved and b.solved
    assert [r.to_json() for r in a.plan.steps] == [r.to_json() for r in b.plan.steps]
    assert a.stats.expansions_fwd == b.stats.expansions_fwd
    assert a.stats.expansions_bwd == b.stats.expansions_bwd


def test_timeout_outcome():
    rng = np.random.default_rng(27)
    ini_s = random_typed_polycube(40, rng)
    goal_s = scramble(ini_s, 30, rng)
    ini, goal = cfg_from_state(ini_s), cfg_from_state(goal_s)
    out = plan_bidirectional(ini, goal, limits=SearchLimits(timeout_s=0.0))
    assert out.kind is OutcomeKind.TIMEOUT
    assert out.plan is None


def test_non_conservative_instance_rejected():
    other = cfg_of([(0, 0, 0), (1, 0, 0), (2, 0, 0)], ModuleType.JOINT)
    with pytest.raises(Exception, match="non-conservative"):
        plan_bidirectional(LINE3, other)


def test_plan_json_shape():
    out = plan_bidirectional(LINE3, LTROMINO)
    doc = macro_plan_to_json(out.plan, out.stats)
    assert doc["steps"][0].keys() == {"from", "to", "type"}
    assert "expansions_fwd" in doc["stats"]
    assert "wall_time_s" not in doc["stats"]
