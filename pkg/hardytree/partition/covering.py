"""The covering number N(K, eps): greedy upper bound and a small-tree exhaustive oracle."""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from hardytree.exceptions import DomainError, PartitionError
from hardytree.geometry.subtree import Partition, Subtree, validate_partition
from hardytree.geometry.tree import SNAP
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID
from hardytree.partition.regions import BISECTION_TOL, Piece, Region, RegionEvaluator, below, merge, region
from hardytree.partition.sweep import Sweep, region_length
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")

EXACT_MAX_SEGMENTS = 8
EXACT_CANDIDATES = 32
EXACT_SHAPE_BUDGET = 200000

State = FrozenSet[Tuple[int, float]]


def mode_for(p: PNorm) -> str:
    return "exact" if p.is_finite and p.p > 1 else "two-sided-estimate"


@dataclass(frozen=True)
class EpsPartitionResult:
    """
    A partition of K into parts with A <= eps.

    `count` is the greedy upper bound on N(K, eps); `exact_count` is the oracle value when it ran.
    """

    eps: float
    partition: Partition
    values: Tuple[float, ...]
    count: int
    exact_count: Optional[int]
    mode: str
    tolerance: float
    min_part_length: float
    cut_offsets: Mapping[str, Tuple[float, ...]]

    @property
    def parts(self) -> Tuple[Subtree, ...]:
        return self.partition.parts


def compute_N(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    eps: float,
    grid: int = DEFAULT_GRID,
    exact: bool = False,
    candidates: int = EXACT_CANDIDATES,
    seed: int = 0,
    evaluator: Optional[RegionEvaluator] = None,
) -> EpsPartitionResult:
    """
    Greedy leaf-to-root covering of K by parts with A <= eps.

        :param K: The subtree to cover.
        :param eps: Positive threshold.
        :param exact: Also run the exhaustive oracle (at most 8 segments).
        :param evaluator: Shared memoised A evaluator, built from (K, u, v, p, grid) when omitted.
        :raises DomainError: if eps <= 0.
    """
    if not eps > 0:
        raise DomainError("eps must be positive, got {}".format(eps))
    p = PNorm.parse(p)
    evaluator = evaluator or RegionEvaluator(K, u, v, p, grid, seed)
    whole = evaluator.whole()
    if evaluator(whole) <= eps:
        regions, cut_offsets = [whole], {}
    else:
        sweep = Sweep(evaluator, eps)
        regions, cut_offsets = sweep.run(), sweep.cut_offsets

    partition = Partition(K, tuple(evaluator.subtree(r) for r in regions))
    report = validate_partition(partition)
    if not report.valid:
        raise PartitionError("Greedy covering produced an invalid partition: " + report.describe(), report)

    exact_count = None
    if exact:
        exact_count = exact_N(
            K, u, v, p, eps, grid, candidates=candidates, extra_offsets=cut_offsets, evaluator=evaluator
        )
    tolerance = BISECTION_TOL * max(K.host.tree.edges[s.edge].length for s in K.segments)
    result = EpsPartitionResult(
        eps=eps,
        partition=partition,
        values=tuple(evaluator(r) for r in regions),
        count=len(regions),
        exact_count=exact_count,
        mode=mode_for(p),
        tolerance=tolerance,
        min_part_length=min(region_length(r) for r in regions),
        cut_offsets={edge: tuple(sorted(offsets)) for edge, offsets in cut_offsets.items()},
    )
    LOGGER.info(
        "N(eps={:.6g}) <= {}{}".format(eps, result.count, "" if exact_count is None else ", exact {}".format(exact_count))
    )
    return result


class _CoverSearch:
    """Exhaustive covering over candidate cut offsets, memoised by the still-uncovered region."""

    def __init__(self, evaluator: RegionEvaluator, eps: float, offsets: Dict[int, List[float]], budget: int):
        self.evaluator = evaluator
        self.K = evaluator.K
        self.eps = eps
        self.offsets = offsets
        self.budget = budget
        self.shapes = 0
        self.memo: Dict[State, int] = {}

    def remainder(self, state: State) -> Optional[Region]:
        return merge(*(below(self.K, index, start) for index, start in state))

    def shapes_from(self, frontier: Sequence[Tuple[int, float]], pieces: Tuple[Piece, ...] = (),
                    bottoms: Tuple[State, ...] = ()) -> Iterator[Tuple[Tuple[Piece, ...], Tuple[State, ...]]]:
        """Feasible parts anchored at the shared top point, grown one frontier entry at a time."""
        if not frontier:
            yield pieces, bottoms
            return
        (index, start), rest = frontier[0], list(frontier[1:])
        segment = self.K.segments[index]
        for t in (t for t in self.offsets[index] if t > start + SNAP):
            grown = pieces + ((segment.edge, start, t),)
            self.shapes += 1
            if self.shapes > self.budget:
                raise DomainError("Exact covering search exceeded {} shapes".format(self.budget))
            if self.evaluator(region(grown)) > self.eps:
                break
            if t < segment.hi - SNAP:
                yield from self.shapes_from(rest, grown, bottoms + (frozenset([(index, t)]),))
                continue
            kids = self.K.child_segments(index)
            for size in range(len(kids) + 1):
                for taken in itertools.combinations(kids, size):
                    left = [k for k in kids if k not in taken]
                    extra = (frozenset((k, self.K.segments[k].lo) for k in left),) if left else ()
                    yield from self.shapes_from(
                        rest + [(k, self.K.segments[k].lo) for k in taken], grown, bottoms + extra
                    )

    def cover(self, state: State) -> int:
        if state in self.memo:
            return self.memo[state]
        if self.evaluator(self.remainder(state)) <= self.eps:
            self.memo[state] = 1
            return 1
        first = min(state)
        others = sorted(state - {first})
        best = math.inf
        for size in range(len(others) + 1):
            for chosen in itertools.combinations(others, size):
                left = frozenset(others) - frozenset(chosen)
                rest = self.cover(left) if left else 0
                if rest + 1 >= best:
                    continue
                for _, bottoms in self.shapes_from([first, *chosen]):
                    total = 1 + rest + sum(self.cover(b) for b in bottoms)
                    best = min(best, total)
        self.memo[state] = best
        return best


def exact_N(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    eps: float,
    grid: int = DEFAULT_GRID,
    candidates: int = EXACT_CANDIDATES,
    extra_offsets: Optional[Mapping[str, Sequence[float]]] = None,
    evaluator: Optional[RegionEvaluator] = None,
    max_segments: int = EXACT_MAX_SEGMENTS,
    budget: int = EXACT_SHAPE_BUDGET,
) -> int:
    """
    Minimal number of parts with A <= eps among partitions whose cuts sit on candidate offsets.

    Candidates are `candidates` uniform offsets per segment plus `extra_offsets` (typically the
    greedy cuts, so the oracle never exceeds the greedy count).

        :raises DomainError: if K has more than `max_segments` segments, eps <= 0, or the search
            exceeds its shape budget.
    """
    if not eps > 0:
        raise DomainError("eps must be positive, got {}".format(eps))
    if len(K.segments) > max_segments:
        raise DomainError(
            "Exact covering runs on at most {} segments, got {}".format(max_segments, len(K.segments))
        )
    evaluator = evaluator or RegionEvaluator(K, u, v, p, grid)
    extra_offsets = extra_offsets or {}
    offsets: Dict[int, List[float]] = {}
    for index, segment in enumerate(K.segments):
        points = {round(segment.lo + (segment.hi - segment.lo) * k / candidates, 12) for k in range(1, candidates + 1)}
        points.update(round(t, 12) for t in extra_offsets.get(segment.edge, ()) if segment.lo < t < segment.hi)
        points.add(round(segment.hi, 12))
        offsets[index] = sorted(points)

    search = _CoverSearch(evaluator, eps, offsets, budget)
    top = frozenset((index, round(K.segments[index].lo, 12)) for index in K.child_segments(None))
    count = search.cover(top)
    if math.isinf(count):
        raise DomainError("No covering of K with parts on the candidate offsets; refine the candidates")
    LOGGER.debug("Exact covering: {} parts after {} shapes".format(count, search.shapes))
    return int(count)
