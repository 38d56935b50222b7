"""Exponent-level cost formulas and their exact optimisation."""
from .expr import (
    Affine,
    CostExpr,
    Switch,
    Term,
    const,
    cost_k_level,
    cost_single_level,
    cost_two_level,
    exp_max,
    exp_min,
    var,
)
from .fit import DEFAULT_GRID, fit_exponent, minimize_cost
from .formulas import (
    collision_expr,
    mss_constraints,
    mss_expr,
    mss_numeric,
    nested_3527_constraints,
    nested_3527_expr,
    nested_3527_numeric,
    nested_97_constraints,
    nested_97_expr,
    nested_97_numeric,
    sparse_mss_expr,
)
from .lp import (
    Constraint,
    Disjunction,
    Optimum,
    check_assignment,
    eq,
    ge,
    infeasible_subset,
    le,
    optimize_exponents,
    solve_lp,
)
from .programs import (
    SubgraphProgram,
    edge_local_cost_comparison,
    evaluate_program,
    format_program,
    instruction_costs,
    lg_hyp_violations,
    optimize_program,
    parse_program,
    program_constraints,
    valid_orderings,
)

__all__ = [
    "DEFAULT_GRID",
    "fit_exponent",
    "minimize_cost",
    "Affine",
    "CostExpr",
    "Switch",
    "Term",
    "const",
    "cost_k_level",
    "cost_single_level",
    "cost_two_level",
    "exp_max",
    "exp_min",
    "var",
    "collision_expr",
    "mss_constraints",
    "mss_expr",
    "mss_numeric",
    "nested_3527_constraints",
    "nested_3527_expr",
    "nested_3527_numeric",
    "nested_97_constraints",
    "nested_97_expr",
    "nested_97_numeric",
    "sparse_mss_expr",
    "Constraint",
    "Disjunction",
    "Optimum",
    "check_assignment",
    "eq",
    "ge",
    "infeasible_subset",
    "le",
    "optimize_exponents",
    "solve_lp",
    "SubgraphProgram",
    "edge_local_cost_comparison",
    "evaluate_program",
    "format_program",
    "instruction_costs",
    "lg_hyp_violations",
    "optimize_program",
    "parse_program",
    "program_constraints",
    "valid_orderings",
]
