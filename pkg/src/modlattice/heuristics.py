"""Assignment-based macro-distance estimators for the high-level search.

Both estimators share the same shape:

    h = misplaced_total + beta * D + penalty

``misplaced_total`` counts occupied cells whose type disagrees with the goal
at that cell; it is an admissible lower bound on the remaining relocation
count because one relocation can fix at most one cell.  ``D`` is a per-type
source-to-target assignment distance (optimal for the Hungarian variant,
nearest-unclaimed for the Greedy one) scaled by ``beta`` so it acts purely as
a sub-unit tie-breaker.  The optional type penalty weights per-type
misplacement counts to break symmetric ties among interchangeable
placements; it is what keeps the search directional on heterogeneous
instances.

Goal comparison here is in absolute cell coordinates: the planner works in a
fixed world frame, so no translation normalization is applied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lattice import (
    MODULE_TYPES,
    Cell,
    Configuration,
    ModuleType,
    StructureError,
    manhattan,
)


class HeuristicKind(Enum):
    HUNGARIAN = "hungarian"
    GREEDY = "greedy"


@dataclass(frozen=True)
class PenaltyConfig:
    """Additive type-misplacement penalty.

    ``weights`` gives the per-type multiplier; ``scale`` is the global factor.
    The defaults penalize rarer, actuated types harder (Joint, Wheel) so the
    search fixes them before shuffling interchangeable Base modules around.
    """

    enabled: bool = True
    scale: float = 0.5
    weights: Mapping[ModuleType, float] = field(
        default_factory=lambda: {
            ModuleType.BASE: 1.0,
            ModuleType.JOINT: 2.0,
            ModuleType.WHEEL: 3.0,
        }
    )

    def __post_init__(self) -> None:
        if self.scale < 0 or any(w < 0 for w in self.weights.values()):
            raise ValueError("penalty weights must be nonnegative")
        if self.enabled and not any(w > 0 for w in self.weights.values()):
            raise ValueError("enabled penalty needs at least one positive weight")

    @classmethod
    def disabled(cls) -> "PenaltyConfig":
        return cls(enabled=False)


@dataclass(frozen=True)
class MismatchReport:
    """Per-type misplaced modules (sources) and unfilled goal cells (targets)."""

    sources: dict[ModuleType, tuple[Cell, ...]]
    targets: dict[ModuleType, tuple[Cell, ...]]

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.sources.values())


def _occ(cfg: Configuration | Mapping[Cell, ModuleType]) -> Mapping[Cell, ModuleType]:
    return cfg._occ if isinstance(cfg, Configuration) else cfg


def _check_conservative(
    a: Mapping[Cell, ModuleType], b: Mapping[Cell, ModuleType]
) -> None:
    counts_a = {m: 0 for m in MODULE_TYPES}
    counts_b = {m: 0 for m in MODULE_TYPES}
    for t in a.values():
        counts_a[t] += 1
    for t in b.values():
        counts_b[t] += 1
    if counts_a != counts_b:
        raise StructureError("non-conservative instance: type multisets differ")


def mismatch(
    cfg: Configuration | Mapping[Cell, ModuleType],
    goal: Configuration | Mapping[Cell, ModuleType],
) -> MismatchReport:
    """Per type m: sources = C^m \\ G^m, targets = G^m \\ C^m."""
    occ, gocc = _occ(cfg), _occ(goal)
    _check_conservative(occ, gocc)
    sources: dict[ModuleType, tuple[Cell, ...]] = {}
    targets: dict[ModuleType, tuple[Cell, ...]] = {}
    for m in MODULE_TYPES:
        sources[m] = tuple(sorted(c for c, t in occ.items() if t is m and gocc.get(c) is not m))
        targets[m] = tuple(sorted(c for c, t in gocc.items() if t is m and occ.get(c) is not m))
    return MismatchReport(sources=sources, targets=targets)


def _beta(occ: Mapping[Cell, ModuleType], gocc: Mapping[Cell, ModuleType]) -> float:
    # D_max = Manhattan diameter of the instance bounding box; beta keeps the
    # whole distance term strictly below one relocation.
    cells = list(occ) + list(gocc)
    d_max = sum(
        max(c[i] for c in cells) - min(c[i] for c in cells) for i in range(3)
    )
    return 1.0 / (1.0 + len(occ) * d_max)


def assignment_distance_optimal(report: MismatchReport) -> int:
    """Minimum total per-type Manhattan assignment (Kuhn-Munkres)."""
    total = 0
    for m in MODULE_TYPES:
        src, tgt = report.sources[m], report.targets[m]
        if not src:
            continue
        s = np.asarray(src)
        t = np.asarray(tgt)
        cost = np.abs(s[:, None, :] - t[None, :, :]).sum(axis=2)
        rows, cols = linear_sum_assignment(cost)
        total += int(cost[rows, cols].sum())
    return total


def assignment_distance_greedy(report: MismatchReport) -> int:
    """Each source, in canonical cell order, claims its nearest free target.

    Ties break toward the canonically smaller target.  Never below the
    optimal assignment distance.
    """
    total = 0
    for m in MODULE_TYPES:
        src, tgt = report.sources[m], report.targets[m]
        free = list(tgt)
        for s in src:
            best_i = min(range(len(free)), key=lambda i: (manhattan(s, free[i]), free[i]))
            total += manhattan(s, free[best_i])
            free.pop(best_i)
    return total


def type_penalty(
    cfg: Configuration | Mapping[Cell, ModuleType],
    goal: Configuration | Mapping[Cell, ModuleType],
    penalty: PenaltyConfig,
) -> float:
    if not penalty.enabled:
        return 0.0
    report = mismatch(cfg, goal)
    return penalty.scale * sum(
        penalty.weights.get(m, 0.0) * len(report.sources[m]) for m in MODULE_TYPES
    )


def _h(
    occ: Mapping[Cell, ModuleType],
    gocc: Mapping[Cell, ModuleType],
    penalty: PenaltyConfig,
    kind: HeuristicKind,
) -> float:
    report = mismatch(occ, gocc)
    if kind is HeuristicKind.HUNGARIAN:
        dist = assignment_distance_optimal(report)
    else:
        dist = assignment_distance_greedy(report)
    h = report.total + _beta(occ, gocc) * dist
    if penalty.enabled:
        h += penalty.scale * sum(
            penalty.weights.get(m, 0.0) * len(report.sources[m]) for m in MODULE_TYPES
        )
    return h


def h_hungarian(
    cfg: Configuration | Mapping[Cell, ModuleType],
    goal: Configuration | Mapping[Cell, ModuleType],
    penalty: PenaltyConfig | None = None,
) -> float:
    """Admissible estimate: with the penalty disabled, floor(h) never exceeds
    the optimal remaining macro-plan length."""
    return _h(_occ(cfg), _occ(goal), penalty or PenaltyConfig.disabled(), HeuristicKind.HUNGARIAN)


def h_greedy(
    cfg: Configuration | Mapping[Cell, ModuleType],
    goal: Configuration | Mapping[Cell, ModuleType],
    penalty: PenaltyConfig | None = None,
) -> float:
    """Faster, non-admissible alternative using nearest-free-target matching."""
    return _h(_occ(cfg), _occ(goal), penalty or PenaltyConfig.disabled(), HeuristicKind.GREEDY)


def heuristic(
    kind: HeuristicKind,
    cfg: Configuration | Mapping[Cell, ModuleType],
    goal: Configuration | Mapping[Cell, ModuleType],
    penalty: PenaltyConfig | None = None,
) -> float:
    if kind is HeuristicKind.HUNGARIAN:
        return h_hungarian(cfg, goal, penalty)
    return h_greedy(cfg, goal, penalty)
