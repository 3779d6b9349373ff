from .base import DEFAULT_GRID, DiscretizedOperator, apply
from .norms import NormEstimate, RefinementResult, SingularSpectrum, approx_numbers_p2, grid_refinement, op_norm
from .quotient import AValue, Shift, A_value, argmin_shift, min_over_roots
from .approximant import FiniteRankApproximant, finite_rank_approximant, part_errors

__all__ = [
    "DEFAULT_GRID",
    "DiscretizedOperator",
    "apply",
    "NormEstimate",
    "RefinementResult",
    "SingularSpectrum",
    "approx_numbers_p2",
    "grid_refinement",
    "op_norm",
    "AValue",
    "Shift",
    "A_value",
    "argmin_shift",
    "min_over_roots",
    "FiniteRankApproximant",
    "finite_rank_approximant",
    "part_errors",
]
