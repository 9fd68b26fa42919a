"""Lattice structure, connectivity and feasibility predicate tests."""
import json

import numpy as np
import pytest

from modlattice.lattice import (
    Configuration,
    ModuleType,
    StructureError,
    TypeRatio,
    addable_cells,
    articulation_cells,
    canonical,
    configuration_from_json,
    configuration_to_json,
    is_connected,
    neighbors6,
    overlap,
    removable_cells,
)

from oracles import connected as oracle_connected, random_typed_polycube

B = ModuleType.BASE
J = ModuleType.JOINT
W = ModuleType.WHEEL


def line(n, t=B, axis=0):
    occ = {}
    for i in range(n):
        c = [0, 0, 0]
        c[axis] = i
        occ[tuple(c)] = t
    return occ


def test_neighbors6_origin():
    assert set(neighbors6((0, 0, 0))) == {
        (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
    }


def test_neighbors6_unit_distance_and_irreflexive():
    c = (2, -1, 3)
    for n in neighbors6(c):
        assert sum(abs(a - b) for a, b in zip(c, n)) == 1
    assert c not in neighbors6(c)


def test_is_connected_singleton_gap_block():
    assert is_connected({(0, 0, 0): B})
    assert not is_connected({(0, 0, 0): B, (2, 0, 0): B})
    block = {(x, y, 0): B for x in range(2) for y in range(2)}
    assert is_connected(block)


def test_is_connected_empty_errors():
    with pytest.raises(StructureError):
        is_connected({})


def test_removable_line_and_block():
    assert removable_cells(line(3)) == {(0, 0, 0), (2, 0, 0)}
    block = {(x, y, 0): B for x in range(2) for y in range(2)}
    assert removable_cells(block) == set(block)
    assert removable_cells(block, leaf_only=True) == set()


def test_removable_singleton_errors():
    with pytest.raises(StructureError):
        removable_cells({(0, 0, 0): B})


def test_addable_singleton_and_line():
    assert addable_cells({(0, 0, 0): B}) == set(neighbors6((0, 0, 0)))
    add = addable_cells(line(3))
    assert len(add) == 14
    assert add.isdisjoint(line(3))


def test_canonical_translation_invariance():
    occ = {(0, 0, 0): B, (1, 0, 0): J}
    shifted = {(5, -3, 2): B, (6, -3, 2): J}
    assert canonical(occ) == canonical(shifted)
    retyped = {(0, 0, 0): B, (1, 0, 0): W}
    assert canonical(occ) != canonical(retyped)


def test_canonical_rotation_not_normalized():
    occ = {(0, 0, 0): B, (1, 0, 0): J}
    rotated = {(0, 0, 0): B, (0, 1, 0): J}
    assert canonical(occ) != canonical(rotated)


def test_overlap_values():
    a = Configuration(line(3))
    assert overlap(a, a) == 1.0
    b = Configuration({(x, 0, 0): B for x in range(1, 4)})
    assert overlap(a, b) == pytest.approx(2 / 3)
    far = Configuration({(x, 10, 0): B for x in range(3)})
    assert overlap(a, far) == 0.0


def test_overlap_size_mismatch():
    with pytest.raises(StructureError):
        overlap(Configuration(line(3)), Configuration(line(4)))


def test_type_ratio_must_sum_to_one():
    TypeRatio(0.6, 0.2, 0.2)
    with pytest.raises(StructureError):
        TypeRatio(0.6, 0.2, 0.1)


def test_configuration_rejects_disconnected():
    with pytest.raises(StructureError):
        Configuration({(0, 0, 0): B, (2, 0, 0): B})


def test_json_round_trip():
    cfg = Configuration({(0, 0, 0): B, (1, 0, 0): J, (1, 1, 0): W})
    doc = configuration_to_json(cfg)
    assert json.dumps(doc)  # serializable
    back = configuration_from_json(doc)
    assert back.key() == cfg.key()


def test_removability_matches_brute_force():
    # removable(cfg) must be exactly the non-articulation cells.
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 31))
        state = random_typed_polycube(n, rng)
        occ = {c: ModuleType.from_name(t) for c, t in state}
        removable = removable_cells(occ)
        for c in occ:
            rest = set(occ) - {c}
            assert (c in removable) == oracle_connected(rest)


def test_leaf_only_subset_of_removable():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 25))
        state = random_typed_polycube(n, rng)
        occ = {c: ModuleType.from_name(t) for c, t in state}
        assert removable_cells(occ, leaf_only=True) <= removable_cells(occ)


def test_addable_preserves_connectivity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(1, 20))
        state = random_typed_polycube(n, rng)
        occ = {c: ModuleType.from_name(t) for c, t in state}
        for a in addable_cells(occ):
            assert oracle_connected(set(occ) | {a})


def test_canonical_sensitive_to_single_edits():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 15))
        state = random_typed_polycube(n, rng)
        occ = {c: ModuleType.from_name(t) for c, t in state}
        base = canonical(occ)
        c = sorted(occ)[int(rng.integers(len(occ)))]
        flipped = dict(occ)
        flipped[c] = J if occ[c] is not J else W
        assert canonical(flipped) != base


def test_articulation_cells_complement():
    occ = line(5)
    art = articulation_cells(occ)
    assert art == {(1, 0, 0), (2, 0, 0), (3, 0, 0)}
