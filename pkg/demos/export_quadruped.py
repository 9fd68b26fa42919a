"""Build a quadruped out of modules and export its articulated model.

A 3 x 3 Base torso carries four legs, each one Joint module over one Base
foot.  The exporter merges rigidly connected runs of modules into bodies
and emits one joint per remaining adjacency: revolute at Joint modules,
continuous at Wheel modules, fixed elsewhere.
"""
import json

from modlattice.export import export_model
from modlattice.lattice import Configuration, ModuleType

B = ModuleType.BASE
J = ModuleType.JOINT


def main():
    occ = {(x, y, 2): B for x in range(3) for y in range(3)}
    for cx, cy in [(0, 0), (0, 2), (2, 0), (2, 2)]:
        occ[(cx, cy, 1)] = J
        occ[(cx, cy, 0)] = B
    model = export_model(Configuration(occ))

    print(f"bodies: {len(model.bodies)}")
    for body in model.bodies:
        print(f"  body {body.id}: {len(body.cells)} cell(s), type {body.module_type.value}")
    print(f"joints: {len(model.joints)} (tree: bodies - 1 = {len(model.bodies) - 1})")
    for joint in model.joints:
        print(f"  {joint.parent} -> {joint.child}: {joint.kind}, axis {joint.axis}")
    print("document:", json.dumps(model.to_json())[:120], "...")


if __name__ == "__main__":
    main()
