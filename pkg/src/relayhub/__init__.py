"""Hub capacity planning with routing for relay freight under demand and disruption uncertainty."""

from .metrics import Comparison, EnvFactors, PlanReport, compare_runs, compute_metrics, fuel_and_co2, plot_data_csv
from .model import (
    CapacityPlan,
    MilpInstance,
    Mode,
    ModelError,
    PlanningData,
    SecondStage,
    SolutionIntegrityError,
    audit_solution,
    build_deterministic_equivalent,
    expected_costs,
    extract_solution,
)
from .mps import MpsParseError, export_mps, import_mps
from .network import (
    Arc,
    CostTable,
    Horizon,
    Network,
    NetworkError,
    Node,
    NodeKind,
    build_relay_network,
    great_circle_miles,
    validate_network,
)
from .reduction import (
    Reduction,
    distance_matrix,
    ffs_reduce,
    kantorovich_subset_distance,
    reduce_scenario_set,
    scenario_distance,
    transport_distance,
)
from .scenarios import (
    Scenario,
    ScenarioSet,
    gen_demand_scenarios,
    gen_disruption_scenarios,
    generate_scenario_set,
    poisson_sample,
    weekly_demand_rates,
)
from .solver import (
    BnbReport,
    LpSolution,
    LpStatus,
    SolverError,
    enumerate_plans,
    evaluate_fixed_plan,
    simplex,
    solve_lp,
    solve_milp,
)

__version__ = "0.1.0"
