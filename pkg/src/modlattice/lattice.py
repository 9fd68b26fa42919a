"""Integer-lattice structures built from typed cubic modules.

A structure is a set of unit cells on the integer grid, each cell holding one
module of a given type.  Structural connectivity is 6-face adjacency: two
modules touch iff their cells share a face.  Edge or corner contact is never
structural.  The lattice is unbounded; instances carry their own extents.

The physical module edge is 12 cm, but that scale is metadata only and never
enters any computation here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

Cell = tuple[int, int, int]

#: Face-neighbor offsets in fixed order: +x, -x, +y, -y, +z, -z.
FACE_OFFSETS: tuple[Cell, ...] = (
    (1, 0, 0),
    (-1, 0, 0),
    (0, 1, 0),
    (0, -1, 0),
    (0, 0, 1),
    (0, 0, -1),
)

#: Edge-neighbor offsets: exactly two coordinates differ by one.
EDGE_OFFSETS: tuple[Cell, ...] = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if abs(dx) + abs(dy) + abs(dz) == 2
)


class StructureError(ValueError):
    """Raised when a structure violates a lattice invariant."""


class ModuleType(Enum):
    BASE = "Base"
    JOINT = "Joint"
    WHEEL = "Wheel"

    @classmethod
    def from_name(cls, name: str) -> "ModuleType":
        for m in cls:
            if m.value == name:
                return m
        raise StructureError(f"unknown module type {name!r}")


MODULE_TYPES: tuple[ModuleType, ...] = (ModuleType.BASE, ModuleType.JOINT, ModuleType.WHEEL)

Occupancy = Mapping[Cell, ModuleType]


@dataclass(frozen=True)
class TypeRatio:
    """Fraction of modules per type; fractions must sum to one."""

    base: float
    joint: float
    wheel: float

    def __post_init__(self) -> None:
        for f in (self.base, self.joint, self.wheel):
            if not 0.0 <= f <= 1.0:
                raise StructureError("type fractions must lie in [0, 1]")
        if abs(self.base + self.joint + self.wheel - 1.0) > 1e-9:
            raise StructureError("type fractions must sum to 1")

    def as_mapping(self) -> dict[ModuleType, float]:
        return {
            ModuleType.BASE: self.base,
            ModuleType.JOINT: self.joint,
            ModuleType.WHEEL: self.wheel,
        }


def neighbors6(c: Cell) -> tuple[Cell, ...]:
    """The six face-adjacent cells of ``c`` in the fixed offset order."""
    x, y, z = c
    return (
        (x + 1, y, z),
        (x - 1, y, z),
        (x, y + 1, z),
        (x, y - 1, z),
        (x, y, z + 1),
        (x, y, z - 1),
    )


class Configuration:
    """Immutable typed occupancy of lattice cells.

    Invariants: cells are distinct, the occupied set is nonempty and
    6-connected, and the per-type module counts are conserved by every
    relocation applied to it.
    """

    __slots__ = ("_occ", "_key", "_hash")

    def __init__(self, occupancy: Occupancy, validate: bool = True):
        occ = dict(occupancy)
        if validate:
            if not occ:
                raise StructureError("empty structure")
            for c, t in occ.items():
                if not (isinstance(c, tuple) and len(c) == 3):
                    raise StructureError(f"bad cell {c!r}")
                if not isinstance(t, ModuleType):
                    raise StructureError(f"bad module type {t!r} at {c}")
            if not _occupied_connected(occ):
                raise StructureError("structure is not connected")
        self._occ = occ
        self._key = frozenset(occ.items())
        self._hash = hash(self._key)

    @property
    def occupancy(self) -> dict[Cell, ModuleType]:
        return dict(self._occ)

    def cells(self) -> Iterator[Cell]:
        return iter(self._occ)

    def items(self) -> Iterator[tuple[Cell, ModuleType]]:
        return iter(self._occ.items())

    def type_at(self, c: Cell) -> ModuleType | None:
        return self._occ.get(c)

    def type_counts(self) -> dict[ModuleType, int]:
        counts = {m: 0 for m in MODULE_TYPES}
        for t in self._occ.values():
            counts[t] += 1
        return counts

    def key(self) -> frozenset:
        """Absolute typed occupancy key (no translation normalization)."""
        return self._key

    def __len__(self) -> int:
        return len(self._occ)

    def __contains__(self, c: Cell) -> bool:
        return c in self._occ

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Configuration) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Configuration({len(self._occ)} modules)"


def _occupied_connected(occ: Mapping[Cell, object]) -> bool:
    start = next(iter(occ))
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for n in neighbors6(c):
            if n in occ and n not in seen:
                seen.add(n)
                stack.append(n)
    return len(seen) == len(occ)


def is_connected(cfg: Configuration | Occupancy) -> bool:
    """True iff the occupied set forms a single 6-connected component."""
    occ = cfg._occ if isinstance(cfg, Configuration) else cfg
    if not occ:
        raise StructureError("empty structure")
    return _occupied_connected(occ)


def articulation_cells(occ: Mapping[Cell, object]) -> set[Cell]:
    """Cut cells of the face-adjacency graph (iterative Hopcroft-Tarjan)."""
    disc: dict[Cell, int] = {}
    low: dict[Cell, int] = {}
    parent: dict[Cell, Cell | None] = {}
    aps: set[Cell] = set()
    timer = 0
    root = next(iter(occ))
    parent[root] = None
    root_children = 0
    # Explicit stack of (cell, neighbor iterator) frames.
    stack: list[tuple[Cell, Iterator[Cell]]] = []
    disc[root] = low[root] = timer
    timer += 1
    stack.append((root, iter(neighbors6(root))))
    while stack:
        u, it = stack[-1]
        advanced = False
        for v in it:
            if v not in occ:
                continue
            if v not in disc:
                parent[v] = u
                if u == root:
                    root_children += 1
                disc[v] = low[v] = timer
                timer += 1
                stack.append((v, iter(neighbors6(v))))
                advanced = True
                break
            elif v != parent[u]:
                if disc[v] < low[u]:
                    low[u] = disc[v]
        if not advanced:
            stack.pop()
            p = parent[u]
            if p is not None:
                if low[u] < low[p]:
                    low[p] = low[u]
                if p != root and low[u] >= disc[p]:
                    aps.add(p)
    if root_children > 1:
        aps.add(root)
    return aps


def removable_cells(cfg: Configuration | Occupancy, leaf_only: bool = False) -> set[Cell]:
    """Cells whose removal leaves the rest connected.

    With ``leaf_only`` the stricter literal reading is used: only cells of
    adjacency degree 1 qualify.  The default admits every non-articulation
    cell, which keeps rings and solid blocks reconfigurable.
    """
    occ = cfg._occ if isinstance(cfg, Configuration) else cfg
    if len(occ) < 1:
        raise StructureError("empty structure")
    if len(occ) == 1:
        raise StructureError("cannot empty structure")
    if leaf_only:
        return {
            c for c in occ if sum(1 for n in neighbors6(c) if n in occ) == 1
        }
    return set(occ) - articulation_cells(occ)


def addable_cells(cfg: Configuration | Occupancy) -> set[Cell]:
    """Unoccupied cells face-adjacent to at least one occupied cell."""
    occ = cfg._occ if isinstance(cfg, Configuration) else cfg
    if not occ:
        raise StructureError("empty structure")
    out: set[Cell] = set()
    for c in occ:
        for n in neighbors6(c):
            if n not in occ:
                out.add(n)
    return out


CanonicalKey = tuple[tuple[Cell, str], ...]


def canonical(cfg: Configuration | Occupancy) -> CanonicalKey:
    """Translation-normalized typed-shape key.

    The componentwise-minimum corner is shifted to the origin and the
    (cell, type) pairs are serialized in lexicographic cell order.  Equal
    keys mean equal typed shapes up to translation; rotations are
    deliberately not normalized.
    """
    occ = cfg._occ if isinstance(cfg, Configuration) else cfg
    if not occ:
        raise StructureError("empty structure")
    mx = min(c[0] for c in occ)
    my = min(c[1] for c in occ)
    mz = min(c[2] for c in occ)
    return tuple(
        sorted(((c[0] - mx, c[1] - my, c[2] - mz), occ[c].value) for c in occ)
    )


def overlap(a: Configuration, b: Configuration) -> float:
    """Type-sensitive cell-match fraction in the shared absolute frame."""
    if len(a) != len(b):
        raise StructureError("overlap requires equally sized structures")
    matches = sum(1 for c, t in a.items() if b.type_at(c) is t)
    return matches / len(a)


def position_overlap(a: Configuration, b: Configuration) -> float:
    """Position-only match fraction, ignoring module types."""
    if len(a) != len(b):
        raise StructureError("overlap requires equally sized structures")
    cells_b = set(b.cells())
    return sum(1 for c in a.cells() if c in cells_b) / len(a)


def bounding_box(occs: Iterable[Mapping[Cell, object]]) -> tuple[Cell, Cell]:
    """(min corner, max corner) of the union of the given occupancies."""
    cells = [c for occ in occs for c in occ]
    if not cells:
        raise StructureError("empty structure")
    lo = (min(c[0] for c in cells), min(c[1] for c in cells), min(c[2] for c in cells))
    hi = (max(c[0] for c in cells), max(c[1] for c in cells), max(c[2] for c in cells))
    return lo, hi


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) + abs(a[2] - b[2])


# --- JSON interchange -------------------------------------------------------
#
# Configuration files look like:
#   {"modules": [{"pos": [x, y, z], "type": "Base"}, ...]}
# Module entries may carry extra keys (e.g. a per-cell "axis" override used
# by the model exporter); the loader ignores them.


def configuration_to_json(cfg: Configuration) -> dict:
    return {
        "modules": [
            {"pos": list(c), "type": cfg.type_at(c).value}
            for c in sorted(cfg.cells())
        ]
    }


def configuration_from_json(doc: dict) -> Configuration:
    try:
        entries = doc["modules"]
    except (KeyError, TypeError):
        raise StructureError("configuration JSON must contain a 'modules' list")
    occ: dict[Cell, ModuleType] = {}
    for e in entries:
        pos = e.get("pos")
        if not (isinstance(pos, (list, tuple)) and len(pos) == 3):
            raise StructureError(f"bad module position {pos!r}")
        cell = (int(pos[0]), int(pos[1]), int(pos[2]))
        if cell in occ:
            raise StructureError(f"duplicate module at {cell}")
        occ[cell] = ModuleType.from_name(e.get("type", ""))
    return Configuration(occ)


def save_configuration(cfg: Configuration, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(configuration_to_json(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_configuration(path: str) -> Configuration:
    with open(path) as fh:
        return configuration_from_json(json.load(fh))
