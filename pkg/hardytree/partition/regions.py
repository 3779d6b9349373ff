"""Regions of a subtree as edge intervals, with a memoised A evaluator."""
import threading
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from hardytree.exceptions import DomainError
from hardytree.geometry.subtree import Subtree
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID
from hardytree.operators.quotient import A_value
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")

# Relative bisection tolerance on cut offsets.
BISECTION_TOL = 1e-6
# Offsets are rounded to this many digits before memoisation.
KEY_DIGITS = 12

Piece = Tuple[str, float, float]
Region = FrozenSet[Piece]


def region(pieces: Iterable[Piece]) -> Region:
    return frozenset(
        (edge, round(lo, KEY_DIGITS), round(hi, KEY_DIGITS)) for edge, lo, hi in pieces if hi - lo > 0
    )


def merge(*regions: Optional[Region]) -> Optional[Region]:
    """Union of regions that share their top point, None when all are empty."""
    pieces = set()
    for r in regions:
        if r:
            pieces.update(r)
    return frozenset(pieces) or None


class RegionEvaluator:
    """
    A of connected regions of K, memoised by region.

        :param K: The subtree being partitioned.
        :param u: Inner weight on K's host.
        :param v: Outer weight on K's host.
        :param p: Exponent.
        :param grid: Cells per segment for A.
    """

    def __init__(self, K: Subtree, u: StepWeight, v: StepWeight, p, grid: int = DEFAULT_GRID, seed: int = 0):
        self.K, self.u, self.v = K, u, v
        self.p = PNorm.parse(p)
        self.grid = grid
        self.seed = seed
        self.evaluations = 0
        self._cache: Dict[Region, float] = {}
        self._lock = threading.Lock()

    def subtree(self, r: Region) -> Subtree:
        return Subtree.from_segments(self.K.host, sorted(r))

    def __call__(self, r: Optional[Region]) -> float:
        if not r:
            return 0.0
        with self._lock:
            if r in self._cache:
                return self._cache[r]
        value = A_value(self.subtree(r), self.u, self.v, self.p, self.grid, seed=self.seed).value
        with self._lock:
            self._cache[r] = value
            self.evaluations += 1
        return value

    def whole(self) -> Region:
        return region((s.edge, s.lo, s.hi) for s in self.K.segments)


def below(K: Subtree, index: int, start: float) -> Region:
    """Everything of K below offset `start` on segment `index`, that segment included."""
    pieces: List[Piece] = []
    stack = [(index, start)]
    while stack:
        i, lo = stack.pop()
        segment = K.segments[i]
        pieces.append((segment.edge, lo, segment.hi))
        stack.extend((child, K.segments[child].lo) for child in K.child_segments(i))
    return region(pieces)


def bisect_offset(test, lo: float, hi: float, tol: float) -> Tuple[float, float]:
    """
    Brackets the switch point of a monotone predicate on [lo, hi] to within tol.

    `test(t)` must be True at hi and False at lo; returns (left, right) with test(left) False
    and test(right) True.
    """
    if tol <= 0:
        raise DomainError("Bisection tolerance must be positive")
    left, right = lo, hi
    while right - left > tol:
        middle = 0.5 * (left + right)
        if test(middle):
            right = middle
        else:
            left = middle
    return left, right
