from .bnb import BnbReport, branching_column, relative_gap, solve_milp
from .evaluate import (
    EnumerationLimitError,
    FixedPlanResult,
    PlanInfeasibleError,
    enumerate_plans,
    evaluate_fixed_plan,
)
from .simplex import LpSolution, LpStatus, SolverError, dual_bound, simplex, solve_lp

__all__ = [
    "BnbReport",
    "EnumerationLimitError",
    "FixedPlanResult",
    "LpSolution",
    "LpStatus",
    "PlanInfeasibleError",
    "SolverError",
    "branching_column",
    "dual_bound",
    "enumerate_plans",
    "evaluate_fixed_plan",
    "relative_gap",
    "simplex",
    "solve_lp",
    "solve_milp",
]
