"""Opinion dynamics on time-varying directed graphs with opinion-dependent
susceptibility: simulation, invariant checks, limit classification, and
reproducible experiment scenarios.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    OpdynError,
    PreconditionError,
    ScheduleExhaustedError,
    SchemaError,
    ShapeError,
    ValidationError,
)
from .rng import SplitMix64, derive_seed
from .graph import (
    DirectedGraph,
    GraphSchedule,
    PeriodicSchedule,
    RandomSchedule,
    StaticSchedule,
    ValidationReport,
    Violation,
    WeightMatrix,
    find_window_parameters,
    graph_of_matrix,
    is_strongly_connected,
    load_weight_matrix,
    parse_weight_matrix_text,
    random_strongly_connected_matrix,
    strongly_connected_components,
    uniform_complete_matrix,
    union_graph,
    validate_weight_matrix,
    verify_repeated_joint_connectivity,
    weight_matrix,
)
from .dynamics import (
    Constant,
    Custom,
    DeGroot,
    StopRule,
    StubbornExtremist,
    StubbornNeutral,
    StubbornPositive,
    SusceptibilityKind,
    TrajectoryRecord,
    opinion_vector,
    simulate,
    step,
    susceptibility,
    susceptibility_profile,
    system_matrix,
    write_trajectory_csv,
)
from .analysis import (
    LemmaReport,
    LimitClassification,
    Outcome,
    RateEstimate,
    check_lemmas,
    classify_limit,
    degroot_consensus_value,
    detect_consensus,
    estimate_rate,
    stationary_weights,
)
from .scenario import (
    RunSummary,
    Scenario,
    build_schedule,
    generate_initial,
    initial_opinions,
    load_scenario,
    load_scenario_file,
    run_comparison,
    run_scenario,
    schedule_rjsc_status,
    summary_to_dict,
    write_scenario,
    write_summary,
    write_trajectory,
)

__version__ = "0.1.0"
