"""Translate a module configuration into an articulated-model description.

Maximal face-connected groups of Base cells collapse into single rigid
bodies.  Each Joint module becomes its own body attached to its tree parent
by a revolute joint (default axis +z, range 0..360 degrees); each Wheel
module becomes its own body on a continuous joint (default axis +y).  All
other tree adjacencies are fixed joints.  The joint graph is reduced to a
spanning tree by breadth-first traversal from the body containing the
lexicographically smallest cell; dropped loop adjacencies are reported as
warnings.  Mass and inertia are emitted as null placeholders.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .lattice import Cell, Configuration, ModuleType, StructureError, is_connected, neighbors6

DEFAULT_JOINT_AXIS = (0.0, 0.0, 1.0)
DEFAULT_WHEEL_AXIS = (0.0, 1.0, 0.0)


class JointKind:
    FIXED = "fixed"
    REVOLUTE = "revolute"
    CONTINUOUS = "continuous"


@dataclass
class Body:
    id: int
    module_type: ModuleType
    cells: tuple[Cell, ...]
    mass: float | None = None  # placeholder; estimation is out of scope


@dataclass
class Joint:
    kind: str
    parent: int
    child: int
    axis: tuple[float, float, float]
    anchor: Cell
    limits_deg: tuple[float, float] | None = None


@dataclass
class ArticulatedModel:
    bodies: list[Body]
    joints: list[Joint]
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "bodies": [
                {
                    "id": b.id,
                    "type": b.module_type.value,
                    "cells": [list(c) for c in b.cells],
                    "mass": b.mass,
                }
                for b in self.bodies
            ],
            "joints": [
                {
                    "kind": j.kind,
                    "parent": j.parent,
                    "child": j.child,
                    "axis": list(j.axis),
                    "anchor": list(j.anchor),
                    "limits_deg": list(j.limits_deg) if j.limits_deg else None,
                }
                for j in self.joints
            ],
            "warnings": list(self.warnings),
        }


def export_model(
    cfg: Configuration,
    axes: Mapping[Cell, tuple[float, float, float]] | None = None,
) -> ArticulatedModel:
    """Build the articulated model of a connected configuration.

    ``axes`` optionally overrides the joint axis of individual Joint/Wheel
    cells (mirrors the per-module "axis" field of the instance JSON).
    """
    if not is_connected(cfg):
        raise StructureError("cannot export a disconnected structure")
    axes = axes or {}
    occ = cfg.occupancy

    # Group Base cells into maximal face-connected rigid bodies.
    cell_group: dict[Cell, int] = {}
    groups: list[list[Cell]] = []
    for c in sorted(occ):
        if occ[c] is not ModuleType.BASE or c in cell_group:
            continue
        gid = len(groups)
        comp = [c]
        cell_group[c] = gid
        queue = deque([c])
        while queue:
            u = queue.popleft()
            for n in neighbors6(u):
                if occ.get(n) is ModuleType.BASE and n not in cell_group:
                    cell_group[n] = gid
                    comp.append(n)
                    queue.append(n)
        groups.append(sorted(comp))
    for c in sorted(occ):
        if c not in cell_group:
            cell_group[c] = len(groups)
            groups.append([c])

    # Adjacency between bodies, anchored at the child-side cell.
    n_bodies = len(groups)
    adjacency: dict[int, dict[int, Cell]] = {i: {} for i in range(n_bodies)}
    for c in occ:
        for n in neighbors6(c):
            if n in occ and cell_group[c] != cell_group[n]:
                a, b = cell_group[c], cell_group[n]
                adjacency[a].setdefault(b, min(groups[b]))

    root = cell_group[min(occ)]
    order = [root]
    parent_of: dict[int, int] = {}
    seen = {root}
    queue = deque([root])
    warnings: list[str] = []
    tree_edges: set[tuple[int, int]] = set()
    while queue:
        u = queue.popleft()
        for v in sorted(adjacency[u]):
            if v not in seen:
                seen.add(v)
                parent_of[v] = u
                tree_edges.add((min(u, v), max(u, v)))
                order.append(v)
                queue.append(v)
    for u in range(n_bodies):
        for v in adjacency[u]:
            if u < v and (u, v) not in tree_edges:
                warnings.append(
                    f"dropped loop adjacency between bodies {u} and {v} to keep a tree"
                )
    warnings.append("mass and inertia are placeholders (null)")

    # Renumber bodies in BFS order so the root is body 0.
    new_id = {g: i for i, g in enumerate(order)}
    bodies = [
        Body(
            id=new_id[g],
            module_type=occ[groups[g][0]],
            cells=tuple(groups[g]),
        )
        for g in order
    ]
    joints: list[Joint] = []
    for g in order:
        if g not in parent_of:
            continue
        p = parent_of[g]
        child_type = occ[groups[g][0]]
        anchor = min(groups[g])
        if child_type is ModuleType.JOINT:
            kind = JointKind.REVOLUTE
            axis = tuple(axes.get(anchor, DEFAULT_JOINT_AXIS))
            limits = (0.0, 360.0)
        elif child_type is ModuleType.WHEEL:
            kind = JointKind.CONTINUOUS
            axis = tuple(axes.get(anchor, DEFAULT_WHEEL_AXIS))
            limits = None
        else:
            kind = JointKind.FIXED
            axis = (0.0, 0.0, 1.0)
            limits = None
        joints.append(
            Joint(
                kind=kind,
                parent=new_id[p],
                child=new_id[g],
                axis=axis,
                anchor=anchor,
                limits_deg=limits,
            )
        )
    return ArticulatedModel(bodies=bodies, joints=joints, warnings=warnings)
