"""Coverage-constrained test schedule construction on compatibility graphs.

Given a multipartite compatibility graph of testing-dimension values, an
include/exclude scope, a node budget, and a target distribution, this
package builds schedules of mutually compatible configurations that cover
every in-scope value and track the target distribution as closely as
possible, via clique-cover construction refined by simulated annealing or
branch and bound.
"""

from .annealing import (
    NeighborMode,
    SaConfig,
    SimulatedAnnealer,
    anneal,
    expand_cover,
    next_candidate,
    reset_candidate,
    temperature,
)
from .branchbound import (
    BnbConfig,
    BranchAndBound,
    Family,
    SearchNode,
    Strategy,
    branch_refine,
    branch_scratch,
    complete_refine,
    complete_scratch,
    is_feasible,
    solve,
)
from .errors import (
    CheckpointMismatch,
    CliqueschedError,
    CoverExceedsBudget,
    DegenerateTarget,
    EmptyLayer,
    EmptySchedule,
    Infeasible,
    InvalidInstance,
    InvalidSolution,
    TooLarge,
    UnitMismatch,
    UnsatisfiableInclude,
)
from .graphops import (
    CliqueCover,
    build_clique,
    clique_cover,
    enumerate_cliques,
    iter_extensions,
    prune_graph,
    restrict_dimension_size,
    scope_graph,
)
from .model import (
    CompatibilityGraph,
    Config,
    ConstraintReport,
    Instance,
    Schedule,
    Scope,
    check_schedule,
    covers,
    is_clique,
    make_config,
    schedule_vertices,
    validate_instance,
)
from .objective import (
    Distribution,
    ObjectiveKind,
    TargetSpec,
    adjust_targets,
    cost,
    lower_bound,
    true_distribution,
)
from .pipeline import (
    ALGORITHM_IDS,
    Checkpoint,
    NodeGroup,
    PackingTable,
    PipelineResult,
    PreparedInstance,
    build_solver,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    load_checkpoint,
    load_instance,
    pack_schedule,
    prepare_instance,
    run_pipeline,
    save_checkpoint,
    save_instance,
)
from .reduction import (
    GeneralGraph,
    ReducedInstance,
    brute_force,
    find_clique_cover,
    map_back,
    reduce_to_instance,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_IDS",
    "BnbConfig",
    "BranchAndBound",
    "Checkpoint",
    "CheckpointMismatch",
    "CliqueCover",
    "CliqueschedError",
    "CompatibilityGraph",
    "Config",
    "ConstraintReport",
    "CoverExceedsBudget",
    "DegenerateTarget",
    "Distribution",
    "EmptyLayer",
    "EmptySchedule",
    "Family",
    "GeneralGraph",
    "Infeasible",
    "Instance",
    "InvalidInstance",
    "InvalidSolution",
    "NeighborMode",
    "NodeGroup",
    "ObjectiveKind",
    "PackingTable",
    "PipelineResult",
    "PreparedInstance",
    "ReducedInstance",
    "SaConfig",
    "Schedule",
    "Scope",
    "SearchNode",
    "SimulatedAnnealer",
    "Strategy",
    "TargetSpec",
    "TooLarge",
    "UnitMismatch",
    "UnsatisfiableInclude",
    "adjust_targets",
    "anneal",
    "branch_refine",
    "branch_scratch",
    "brute_force",
    "build_clique",
    "build_solver",
    "check_schedule",
    "clique_cover",
    "complete_refine",
    "complete_scratch",
    "cost",
    "covers",
    "enumerate_cliques",
    "expand_cover",
    "find_clique_cover",
    "instance_digest",
    "instance_from_dict",
    "instance_to_dict",
    "is_clique",
    "is_feasible",
    "iter_extensions",
    "load_checkpoint",
    "load_instance",
    "lower_bound",
    "make_config",
    "map_back",
    "next_candidate",
    "pack_schedule",
    "prepare_instance",
    "prune_graph",
    "reduce_to_instance",
    "reset_candidate",
    "restrict_dimension_size",
    "run_pipeline",
    "save_checkpoint",
    "save_instance",
    "schedule_vertices",
    "scope_graph",
    "solve",
    "temperature",
    "true_distribution",
    "validate_instance",
]
