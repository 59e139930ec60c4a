"""Fault-tolerant facility placement toolkit.

Clients must route each unit of an integer demand to a distinct open
facility; sites may host any number of facilities.  The package builds
and solves the LP relaxation with dual certificates, rounds fractional
optima to verified integral plans through two decomposition pipelines,
computes exact optima on small instances, and benchmarks the lot.
"""

from .decompose import (
    Decomposition,
    decompose_large,
    decompose_reduce,
    integral_part_cost,
    integral_part_instance,
    residual_fractional_cost,
    residual_instance,
    snap,
)
from .ftfl_bridge import (
    CappedInstance,
    SplitMap,
    materialize_split,
    merge_solution,
    split_counts_large,
    split_counts_reduce,
    to_capped,
)
from .ftfl_solvers import (
    EXACT,
    GREEDY,
    BudgetExceededError,
    InfeasibleError,
    IntegralSolution,
    Subroutine,
    optimal_assignment,
    solution_cost,
    solve_exact,
    solve_greedy,
    subroutine,
)
from .instance import (
    GenParams,
    Instance,
    ParseError,
    generate,
    parse_instance,
    serialize_instance,
    uniform_demand_copy,
    validate,
)
from .lp_core import (
    DualityReport,
    DualSolution,
    FractionalSolution,
    LinearProgram,
    LpInfeasibleError,
    SimplexError,
    build_lp,
    check_duality,
    lp_objective,
    solve_lp,
    trim_to_demand,
)
from .pipeline import (
    SolveReport,
    combine,
    parse_report,
    parse_solution,
    report_to_json,
    serialize_solution,
    solve_large,
    solve_oracle,
    solve_reduce,
    trim_surplus,
    verify_solution,
)

__all__ = [
    "BudgetExceededError",
    "CappedInstance",
    "Decomposition",
    "DualityReport",
    "DualSolution",
    "EXACT",
    "FractionalSolution",
    "GenParams",
    "GREEDY",
    "InfeasibleError",
    "Instance",
    "IntegralSolution",
    "LinearProgram",
    "LpInfeasibleError",
    "ParseError",
    "SimplexError",
    "SolveReport",
    "SplitMap",
    "Subroutine",
    "build_lp",
    "check_duality",
    "combine",
    "decompose_large",
    "decompose_reduce",
    "generate",
    "integral_part_cost",
    "integral_part_instance",
    "lp_objective",
    "materialize_split",
    "merge_solution",
    "optimal_assignment",
    "parse_instance",
    "parse_report",
    "parse_solution",
    "report_to_json",
    "residual_fractional_cost",
    "residual_instance",
    "serialize_instance",
    "serialize_solution",
    "snap",
    "solution_cost",
    "solve_exact",
    "solve_greedy",
    "solve_large",
    "solve_lp",
    "solve_oracle",
    "solve_reduce",
    "split_counts_large",
    "split_counts_reduce",
    "subroutine",
    "to_capped",
    "trim_surplus",
    "trim_to_demand",
    "uniform_demand_copy",
    "validate",
]
