from .bounds import (
    alpha_K,
    boundedness_check,
    candidate_family,
    lq_bound_checks,
    norm_lower_bound,
    p1_inf_bounds,
)
from .constants import Estimate, alpha_p, unit_interval
from .sigma import (
    RegularTreeCondition,
    SequenceNorms,
    SigmaComponent,
    SigmaLevel,
    SigmaTable,
    regular_tree_condition,
    sigma_table,
)

__all__ = [
    "Estimate",
    "RegularTreeCondition",
    "SequenceNorms",
    "SigmaComponent",
    "SigmaLevel",
    "SigmaTable",
    "alpha_K",
    "alpha_p",
    "boundedness_check",
    "candidate_family",
    "regular_tree_condition",
    "lq_bound_checks",
    "norm_lower_bound",
    "p1_inf_bounds",
    "sigma_table",
    "unit_interval",
]
