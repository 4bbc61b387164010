"""uagraph: simulation, census and verification toolkit for bounded-degree
uniform attachment random graphs."""

__version__ = "0.1.0"

from .graph import (
    Ball,
    ModelViolationError,
    SimpleGraph,
    SnapshotFormatError,
    UAGraph,
    ball,
    grow,
    load_graph,
    new_seed_graph,
    read_snapshot,
    write_snapshot,
)
from .degrees import (
    ChernoffBounds,
    DegreeCensus,
    FixedPoint,
    StabilityReport,
    census_degrees,
    chernoff_bounds,
    chernoff_thresholds,
    convergence_experiment,
    drift_field,
    drift_jacobian,
    solve_rho,
    stability_report,
)
from .approx import SAProcess, SATrace, check_conditions, run_sa
from .trees import (
    TreeCensus,
    TreeFixedPoint,
    TreeType,
    canonical_code,
    census_trees,
    compare,
    enumerate_max_admissible,
    solve_tree_fixed_point,
)
from .cycles import (
    CycleRecord,
    UnicyclicCensus,
    UnicyclicType,
    census_unicyclic,
    check_no_multicyclic,
    distance_profile,
    find_cycles,
)
from .ensemble import EnsembleResult, grow_ensemble
from .chain import (
    ChainSpec,
    ChainState,
    EmpiricalDistribution,
    compare_graph_vs_chain,
    derive_constants,
    simulate_limit,
    stationary_truncated,
    step_embedded,
    step_inhomogeneous,
)
from .efgame import (
    DuplicatorStrategy,
    GameConfig,
    MatchState,
    StructureSummary,
    check_Q1,
    check_Q2,
    duplicator_move,
    ef_solve,
    partition_classes,
    summarize_structure,
)

__all__ = [
    "Ball", "ModelViolationError", "SimpleGraph", "SnapshotFormatError",
    "UAGraph", "ball", "grow", "load_graph", "new_seed_graph",
    "read_snapshot", "write_snapshot",
    "ChernoffBounds", "DegreeCensus", "FixedPoint", "StabilityReport",
    "census_degrees", "chernoff_bounds", "chernoff_thresholds",
    "convergence_experiment", "drift_field", "drift_jacobian", "solve_rho",
    "stability_report",
    "SAProcess", "SATrace", "check_conditions", "run_sa",
    "TreeCensus", "TreeFixedPoint", "TreeType", "canonical_code",
    "census_trees", "compare", "enumerate_max_admissible",
    "solve_tree_fixed_point",
    "CycleRecord", "UnicyclicCensus", "UnicyclicType", "census_unicyclic",
    "check_no_multicyclic", "distance_profile", "find_cycles",
    "EnsembleResult", "grow_ensemble",
    "ChainSpec", "ChainState", "EmpiricalDistribution",
    "compare_graph_vs_chain", "derive_constants", "simulate_limit",
    "stationary_truncated", "step_embedded", "step_inhomogeneous",
    "DuplicatorStrategy", "GameConfig", "MatchState", "StructureSummary",
    "check_Q1", "check_Q2", "duplicator_move", "ef_solve",
    "partition_classes", "summarize_structure",
    "__version__",
]
