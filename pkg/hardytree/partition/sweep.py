"""Leaf-to-root sweeps shared by the covering and packing constructions."""
from typing import Dict, List, Optional

from hardytree.geometry.tree import SNAP
from hardytree.log.logging import Logger
from hardytree.partition.regions import (
    BISECTION_TOL,
    Region,
    RegionEvaluator,
    bisect_offset,
    merge,
    region,
)

LOGGER = Logger.get_logger("hardytree")


def region_length(r: Optional[Region]) -> float:
    return sum(hi - lo for _, lo, hi in r) if r else 0.0


class Sweep:
    """
    Grows regions from the leaves of K towards its anchor.

    In covering mode every emitted region has A <= eps; in packing mode every claimed
    region has A > eps and leftovers are dropped.
    """

    def __init__(self, evaluator: RegionEvaluator, eps: float, packing: bool = False) -> None:
        self.evaluator = evaluator
        self.eps = eps
        self.packing = packing
        self.emitted: List[Region] = []
        self.cut_offsets: Dict[str, List[float]] = {}

    def feasible(self, r: Optional[Region]) -> bool:
        return self.evaluator(r) <= self.eps

    def _emit(self, r: Optional[Region]) -> None:
        if r:
            self.emitted.append(r)

    def junction(self, regions: List[Optional[Region]]) -> Optional[Region]:
        """Merges pending regions meeting at one point, smallest A first."""
        pending = sorted((r for r in regions if r), key=lambda r: (self.evaluator(r), sorted(r)))
        current = None
        for r in pending:
            union = merge(current, r)
            if self.packing:
                if self.feasible(union):
                    current = union
                else:
                    self._emit(union)
                    current = None
            elif self.feasible(union):
                current = union
            else:
                self._emit(r)
        return current

    def march(self, edge: str, lo: float, hi: float, pending: Optional[Region], tol: float) -> Optional[Region]:
        """Carries `pending` up the edge interval [lo, hi], emitting regions on the way."""
        top = hi

        def grown(t):
            return merge(pending, region([(edge, t, top)]))

        while True:
            if self.feasible(grown(lo)):
                return grown(lo)
            left, right = bisect_offset(lambda t: self.feasible(grown(t)), lo, top, tol)
            if self.packing:
                cut = left
                self._emit(grown(cut))
            else:
                cut = right
                if not grown(cut):
                    cut = max(lo, top - tol)
                self._emit(grown(cut))
            if cut > lo + SNAP:
                self.cut_offsets.setdefault(edge, []).append(cut)
            top = cut
            pending = None

    def run(self) -> List[Region]:
        K = self.evaluator.K
        pending: Dict[int, Optional[Region]] = {}
        for index in reversed(range(len(K.segments))):
            segment = K.segments[index]
            tol = BISECTION_TOL * K.host.tree.edges[segment.edge].length
            below = self.junction([pending.pop(child) for child in K.child_segments(index)])
            pending[index] = self.march(segment.edge, segment.lo, segment.hi, below, tol)
        final = self.junction([pending.pop(child) for child in K.child_segments(None)])
        if not self.packing:
            self._emit(final)
        LOGGER.debug(
            "{} sweep at eps={:.6g}: {} regions, {} A evaluations".format(
                "Packing" if self.packing else "Covering", self.eps, len(self.emitted), self.evaluator.evaluations
            )
        )
        return self.emitted
