"""The packing number M(K, eps): disjoint subtrees with A > eps."""
from dataclasses import dataclass
from typing import Optional, Tuple

from hardytree.exceptions import DomainError
from hardytree.geometry.subtree import Subtree
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID
from hardytree.partition.covering import mode_for
from hardytree.partition.regions import BISECTION_TOL, RegionEvaluator
from hardytree.partition.sweep import Sweep, region_length
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")


@dataclass(frozen=True)
class EpsPackingResult:
    eps: float
    parts: Tuple[Subtree, ...]
    values: Tuple[float, ...]
    count: int
    mode: str
    tolerance: float
    min_part_length: float


def compute_M(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    eps: float,
    grid: int = DEFAULT_GRID,
    seed: int = 0,
    evaluator: Optional[RegionEvaluator] = None,
) -> EpsPackingResult:
    """
    Greedy packing: regions grow from the leaves and are claimed as soon as A exceeds eps.

    The count is a lower bound for M(K, eps).

        :raises DomainError: if eps <= 0.
    """
    if not eps > 0:
        raise DomainError("eps must be positive, got {}".format(eps))
    p = PNorm.parse(p)
    evaluator = evaluator or RegionEvaluator(K, u, v, p, grid, seed)
    regions = [] if evaluator(evaluator.whole()) <= eps else Sweep(evaluator, eps, packing=True).run()
    tolerance = BISECTION_TOL * max(K.host.tree.edges[s.edge].length for s in K.segments)
    result = EpsPackingResult(
        eps=eps,
        parts=tuple(evaluator.subtree(r) for r in regions),
        values=tuple(evaluator(r) for r in regions),
        count=len(regions),
        mode=mode_for(p),
        tolerance=tolerance,
        min_part_length=min((region_length(r) for r in regions), default=0.0),
    )
    LOGGER.info("M(eps={:.6g}) >= {}".format(eps, result.count))
    return result
