"""Exact fallback optimization for heuristic pod placement on small clusters."""

from .baseline import SchedulingEvent, filter_nodes, queue_order, schedule_trace, score_least_allocated
from .bench import (
    Category,
    OutcomeRecord,
    RunResult,
    classify_outcome,
    emit_report,
    read_outcomes,
    run_experiment,
    summarize,
)
from .cluster import (
    UNPLACED,
    Allocation,
    Instance,
    MalformedAllocationError,
    Node,
    Ordering,
    PlacementVector,
    Pod,
    ResourceVector,
    allocation_from_dict,
    allocation_to_dict,
    compare_lex,
    feasibility_check,
    instance_from_dict,
    instance_to_dict,
    load_allocation,
    load_instance,
    node_loads,
    placement_vector,
    save_allocation,
    save_instance,
    utilization,
)
from .generator import DatasetGenerationError, GenerationParams, generate_dataset, generate_instance
from .optimizer import (
    OptimizeFailed,
    OptimizeParams,
    Plan,
    TierReport,
    TimeBudget,
    bin_packing_constraints,
    move_metric,
    optimize,
    placement_metric,
    plan_to_dict,
)
from .solver import (
    LinearConstraint,
    LinearExpression,
    Model,
    Relation,
    Solution,
    SolveParams,
    SolveStatus,
    brute_force_oracle,
    solve_max,
)

__version__ = "0.1.0"
