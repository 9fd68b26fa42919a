"""Planning and control toolkit for lattice-based heterogeneous modular robots."""

__version__ = "0.1.0"

from .lattice import (
    Cell,
    Configuration,
    ModuleType,
    StructureError,
    TypeRatio,
    addable_cells,
    canonical,
    is_connected,
    load_configuration,
    neighbors6,
    overlap,
    removable_cells,
    save_configuration,
)
from .heuristics import (
    HeuristicKind,
    MismatchReport,
    PenaltyConfig,
    h_greedy,
    h_hungarian,
    mismatch,
    type_penalty,
)
from .macro_planner import (
    CandidateMode,
    MacroPlan,
    OutcomeKind,
    Relocation,
    RelocationError,
    SearchLimits,
    SearchOutcome,
    apply,
    generate_relocations,
    invert,
    plan_bidirectional,
)
from .motion import (
    AssemblerState,
    CostTable,
    ExecutablePlan,
    MotionError,
    Phase,
    Trajectory,
    astar_robot,
    reach_set,
    refine,
    stance_moves,
    task_poses,
)
from .replay import ReplayResult, replay
from .mppi import (
    MppiConfig,
    MppiController,
    PointMassObstacle,
    UnicycleVelocity,
    anneal_schedule,
    mppi_iteration,
    rollout_cost,
    simulate,
)
from .export import ArticulatedModel, export_model
from .benchmark import (
    RATIOS,
    SuiteSpec,
    TrialRecord,
    derive_goal,
    random_connected_config,
    run_suite,
)
