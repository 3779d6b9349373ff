"""The constant alpha_p = A((0, 1), 1, 1)."""
import math
from dataclasses import dataclass
from functools import lru_cache

from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import MetricTree, RootedTree
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID
from hardytree.operators.quotient import min_over_roots
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    exact: bool


def unit_interval():
    """(0, 1) rooted at 0 with u = v = 1."""
    tree = MetricTree(["0", "1"], [("e", "0", "1", 1.0)])
    rooted = RootedTree(tree, "0")
    one = StepWeight.constant(tree, 1.0)
    return Subtree.whole(rooted), one, one


@lru_cache(maxsize=32)
def _numeric(p: PNorm, grid: int) -> Estimate:
    K, u, v = unit_interval()
    coarse, _ = min_over_roots(K, u, v, p, grid)
    fine, _ = min_over_roots(K, u, v, p, 2 * grid)
    # Second-order midpoint quadrature.
    correction = (fine - coarse) / 3.0
    estimate = Estimate(fine + correction, abs(correction) + 1e-9 * fine, exact=False)
    LOGGER.info("alpha_{} = {:.8f} +- {:.2e}".format(p, estimate.value, estimate.error))
    return estimate


def alpha_p(p, grid: int = DEFAULT_GRID) -> Estimate:
    """
    alpha_p: 1/pi for p = 2 and 1/2 for p in {1, inf}, otherwise a min-over-roots evaluation on
    (0, 1) at grids n and 2n with a Richardson error bar.
    """
    p = PNorm.parse(p)
    if p.p == 2:
        return Estimate(1.0 / math.pi, 0.0, exact=True)
    if p.p == 1 or not p.is_finite:
        return Estimate(0.5, 0.0, exact=True)
    return _numeric(p, int(grid))
