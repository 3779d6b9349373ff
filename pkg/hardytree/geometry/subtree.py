"""Subtrees given by an anchor and cut locations, and partitions of them."""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Tuple

from hardytree.exceptions import DomainError, PartitionError, TreeStructureError
from hardytree.geometry.tree import SNAP, Edge, Location, MetricTree, RootedTree, precedes
from hardytree.log.logging import Logger

LOGGER = Logger.get_logger("hardytree")

# Pieces shorter than this are treated as measure zero by coverage checks.
MEASURE_TOL = 1e-9


@dataclass(frozen=True)
class Cut:
    """
    Blocks everything strictly below `location`.
    At a vertex, `edge` restricts the block to a single child edge.
    """

    location: Location
    edge: Optional[str] = None


@dataclass(frozen=True)
class Segment:
    edge: str
    lo: float
    hi: float
    parent: Optional[int]

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class Subtree:
    """
    Closed connected subset of a rooted tree.

    :param host: The rooted tree the subtree lives in.
    :param anchor: The point of the subtree nearest to the root.
    :param cuts: Cuts bounding the subtree below the anchor.
    :param branches: Child edges kept at a vertex anchor, None for all of them.
    """

    host: RootedTree
    anchor: Location
    cuts: FrozenSet[Cut] = frozenset()
    branches: Optional[FrozenSet[str]] = None

    def __post_init__(self):
        anchor = self.host.tree.check(self.anchor)
        object.__setattr__(self, "anchor", anchor)
        for cut in self.cuts:
            self.host.tree.check(cut.location)
            if not precedes(self.host, anchor, cut.location):
                raise TreeStructureError(
                    "Cut {!r} does not lie below the anchor {!r}".format(cut.location, anchor)
                )
        segments = self._walk()
        object.__setattr__(self, "_segments", segments)
        cuts, branches = _canonical_cuts(self.host, anchor, segments)
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "branches", branches)

    @classmethod
    def whole(cls, host: RootedTree) -> "Subtree":
        return cls(host, host.root_location)

    @classmethod
    def from_segments(cls, host: RootedTree, segments: Iterable[Tuple[str, float, float]]) -> "Subtree":
        """
        Builds the subtree made of the given (edge, lo, hi) intervals.

            :raises TreeStructureError: if the intervals do not form a connected set.
        """
        pieces = {}
        for edge_id, lo, hi in segments:
            length = host.tree.edge(edge_id).length
            lo, hi = max(0.0, float(lo)), min(length, float(hi))
            if hi - lo <= SNAP:
                continue
            if edge_id in pieces:
                raise TreeStructureError("Edge {} appears twice".format(edge_id))
            pieces[edge_id] = (0.0 if lo <= SNAP else lo, length if hi >= length - SNAP else hi)
        if not pieces:
            raise TreeStructureError("No segment of positive length")

        tops = []
        for edge_id, (lo, hi) in pieces.items():
            source = host.tree.edges[edge_id].source
            parent = host.parent_edge.get(source)
            attached = (
                lo == 0.0
                and parent in pieces
                and pieces[parent][1] >= host.tree.edges[parent].length
            )
            if not attached:
                tops.append(edge_id)
        top_points = {
            (host.tree.edges[e].source if pieces[e][0] == 0.0 else (e, pieces[e][0])) for e in tops
        }
        if len(top_points) != 1:
            raise TreeStructureError("Segments are not connected: {} top points".format(len(top_points)))
        first = tops[0]
        if pieces[first][0] == 0.0:
            anchor = host.tree.vertex_location(host.tree.edges[first].source)
            branches = frozenset(tops)
        else:
            anchor = host.tree.location(first, pieces[first][0])
            branches = None

        walked = _walk_segments(host, anchor, branches, pieces)
        cuts, branches = _canonical_cuts(host, anchor, walked)
        subtree = cls(host, anchor, cuts, branches)
        if len(subtree.segments) != len(pieces):
            raise TreeStructureError("Segments are not connected")
        return subtree

    @property
    def segments(self) -> Tuple[Segment, ...]:
        return self._segments

    def _walk(self) -> Tuple[Segment, ...]:
        tree = self.host.tree
        stops = {}
        blocked_all, blocked_edges = set(), set()
        for cut in self.cuts:
            loc = cut.location
            if not loc.is_vertex:
                stops.setdefault(loc.edge, []).append(loc.offset)
            elif cut.edge is None:
                blocked_all.add(loc.vertex)
            else:
                blocked_edges.add((loc.vertex, cut.edge))

        def extent(edge_id, lo):
            ends = [s for s in stops.get(edge_id, []) if s > lo + SNAP]
            return min(ends) if ends else tree.edges[edge_id].length

        def below(vertex):
            if vertex in blocked_all:
                return []
            return [e for e in self.host.children[vertex] if (vertex, e) not in blocked_edges]

        if self.anchor.is_vertex:
            start = [(e, 0.0) for e in below(self.anchor.vertex)
                     if self.branches is None or e in self.branches]
        else:
            start = [(self.anchor.edge, self.anchor.offset)]

        segments: List[Segment] = []
        queue = [(edge_id, lo, None) for edge_id, lo in start]
        while queue:
            edge_id, lo, parent = queue.pop(0)
            hi = extent(edge_id, lo)
            segments.append(Segment(edge_id, lo, hi, parent))
            if hi >= tree.edges[edge_id].length:
                index = len(segments) - 1
                queue.extend((child, 0.0, index) for child in below(tree.edges[edge_id].target))
        return tuple(segments)

    @cached_property
    def key(self):
        cuts = sorted(repr((cut.location.key, cut.edge)) for cut in self.cuts)
        branches = tuple(sorted(self.branches)) if self.branches is not None else None
        return (self.anchor.key, tuple(cuts), branches)

    def __eq__(self, other):
        return isinstance(other, Subtree) and other.host is self.host and other.key == self.key

    def __hash__(self):
        return hash(self.key)

    def length(self) -> float:
        return math.fsum(segment.length for segment in self.segments)

    def is_point(self) -> bool:
        return not self.segments

    def child_segments(self, index: Optional[int]) -> List[int]:
        return [i for i, segment in enumerate(self.segments) if segment.parent == index]

    def contains(self, location: Location) -> bool:
        location = self.host.tree.check(location)
        if location == self.anchor:
            return True
        tree = self.host.tree
        for segment in self.segments:
            edge = tree.edges[segment.edge]
            if location.is_vertex:
                if segment.lo == 0.0 and edge.source == location.vertex:
                    return True
                if segment.hi >= edge.length and edge.target == location.vertex:
                    return True
            elif location.edge == segment.edge and segment.lo - SNAP <= location.offset <= segment.hi + SNAP:
                return True
        return False

    def cut_points(self) -> List[Location]:
        """Distinct topological boundary points of the subtree below its anchor."""
        seen, points = set(), []
        for cut in sorted(self.cuts, key=lambda c: (str(c.location.key), c.edge or "")):
            if cut.location not in seen:
                seen.add(cut.location)
                points.append(cut.location)
        return points

    def ends(self) -> List[Location]:
        """Boundary points other than the anchor, leaves of the host included."""
        points = self.cut_points()
        tree = self.host.tree
        for segment in self.segments:
            target = tree.edges[segment.edge].target
            if segment.hi >= tree.edges[segment.edge].length and self.host.is_leaf(target):
                points.append(tree.vertex_location(target))
        return points

    def is_maximal(self) -> bool:
        """True when every cut blocks everything below its point."""
        return all(cut.edge is None for cut in self.cuts)

    def contains_root(self) -> bool:
        return self.anchor.is_vertex and self.anchor.vertex == self.host.root

    def is_interval(self) -> bool:
        if self.is_point():
            return True
        tops = self.child_segments(None)
        if len(tops) > 2:
            return False
        return all(len(self.child_segments(i)) <= 1 for i in range(len(self.segments)))

    def chain(self) -> List[Tuple[str, float, float]]:
        """
        The interval as (edge, start, end) pieces from one end to the other.

            :raises DomainError: if the subtree branches.
        """
        if not self.is_interval():
            raise DomainError("Subtree is not an interval")
        chains = []
        for top in self.child_segments(None):
            chain, index = [], top
            while index is not None:
                segment = self.segments[index]
                chain.append((segment.edge, segment.lo, segment.hi))
                children = self.child_segments(index)
                index = children[0] if children else None
            chains.append(chain)
        if len(chains) == 2:
            return [(e, hi, lo) for e, lo, hi in reversed(chains[0])] + chains[1]
        return chains[0] if chains else []

    @cached_property
    def local_tree(self) -> MetricTree:
        """
        The subtree as a standalone metric tree whose vertices include the boundary points.

        Edge ids are kept and every edge starts at its segment's lower offset.
        """
        if self.is_point():
            raise DomainError("A single-point subtree has no edges")
        edges, vertices = [], []
        for segment in self.segments:
            a = self._vertex_id(segment.edge, segment.lo)
            b = self._vertex_id(segment.edge, segment.hi)
            for v in (a, b):
                if v not in vertices:
                    vertices.append(v)
            edges.append(Edge(segment.edge, a, b, segment.length))
        return MetricTree(vertices, edges)

    def _vertex_id(self, edge_id, offset):
        loc = self.host.tree.location(edge_id, offset)
        return loc.vertex if loc.is_vertex else "{}@{!r}".format(edge_id, offset)

    def as_rooted(self, root: Optional[Location] = None) -> RootedTree:
        """
        The local tree rooted at `root` (a host location inside the subtree), by default the anchor.
        """
        from hardytree.geometry.tree import root_at

        local = self.local_tree
        anchor_id = self._vertex_id(self.segments[0].edge, self.segments[0].lo)
        if root is None:
            return RootedTree(local, anchor_id)
        root = self.to_local(root)
        if root.is_vertex and root.vertex == anchor_id:
            return RootedTree(local, anchor_id)
        return root_at(local, root)

    def to_local(self, location: Location) -> Location:
        """Host location mapped onto local_tree."""
        location = self.host.tree.check(location)
        if not self.contains(location):
            raise DomainError("{!r} is not in the subtree".format(location))
        if location.is_vertex:
            return Location(vertex=location.vertex)
        for segment in self.segments:
            if segment.edge == location.edge:
                offset = min(max(location.offset - segment.lo, 0.0), segment.length)
                return self.local_tree.location(segment.edge, offset)
        raise DomainError("{!r} is not in the subtree".format(location))


def _walk_segments(host, anchor, branches, pieces) -> Tuple[Segment, ...]:
    """Segments reachable from the anchor through the given edge intervals."""
    tree = host.tree
    if anchor.is_vertex:
        queue = [(e, None) for e in host.children[anchor.vertex] if e in branches]
    else:
        queue = [(anchor.edge, None)]
    segments = []
    while queue:
        edge_id, parent = queue.pop(0)
        lo, hi = pieces[edge_id]
        segments.append(Segment(edge_id, lo, hi, parent))
        if hi >= tree.edges[edge_id].length:
            index = len(segments) - 1
            target = tree.edges[edge_id].target
            queue.extend(
                (child, index) for child in host.children[target]
                if child in pieces and pieces[child][0] == 0.0
            )
    return tuple(segments)


def _canonical_cuts(host, anchor, segments):
    """Effective cuts and kept branches of a walked segment list."""
    tree = host.tree
    cuts = set()
    for index, segment in enumerate(segments):
        edge = tree.edges[segment.edge]
        if segment.hi < edge.length - SNAP:
            cuts.add(Cut(tree.location(segment.edge, segment.hi)))
            continue
        kids = host.children[edge.target]
        kept = {segments[i].edge for i, s in enumerate(segments) if s.parent == index}
        if kids and not kept:
            cuts.add(Cut(Location(vertex=edge.target)))
        else:
            cuts.update(Cut(Location(vertex=edge.target), e) for e in kids if e not in kept)
    branches = None
    if anchor.is_vertex:
        kept = frozenset(s.edge for s in segments if s.parent is None)
        if kept != frozenset(host.children[anchor.vertex]):
            branches = kept
    return frozenset(cuts), branches


def components_after_removal(t: RootedTree, x: Location) -> List[Subtree]:
    """
    Closures of the connected components of the tree with the point x removed.

        :param t: The rooted tree.
        :param x: The removed point.
        :return: One Subtree per component, the root-side component first.
    """
    x = t.tree.check(x)
    components = []
    if x.is_vertex and x.vertex == t.root:
        return [Subtree(t, x, branches=frozenset([e])) for e in t.children[x.vertex]]
    components.append(Subtree(t, t.root_location, frozenset([Cut(x)])))
    if x.is_vertex:
        components.extend(Subtree(t, x, branches=frozenset([e])) for e in t.children[x.vertex])
    else:
        components.append(Subtree(t, x))
    return components


@dataclass(frozen=True)
class Partition:
    parent: Subtree
    parts: Tuple[Subtree, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass
class PartitionReport:
    valid: bool
    parent_length: float
    parts_length: float
    gaps: List[Location] = field(default_factory=list)
    overlaps: List[Location] = field(default_factory=list)
    outside: List[Location] = field(default_factory=list)

    def describe(self) -> str:
        if self.valid:
            return "valid partition, total length {:.12g}".format(self.parent_length)
        return "invalid partition: gaps at {}, overlaps at {}, outside parent at {}".format(
            self.gaps, self.overlaps, self.outside
        )


def validate_partition(p: Partition, raise_on_error: bool = False) -> PartitionReport:
    """
    Checks that the parts cover the parent and overlap only in measure-zero sets.

        :param p: The partition.
        :param raise_on_error: Raise PartitionError instead of returning an invalid report.
        :return: PartitionReport with a witness location for every defect.
        :raises PartitionError: if parts live on another host tree.
    """
    host = p.parent.host
    for part in p.parts:
        if part.host is not host:
            raise PartitionError("Part {!r} belongs to a different host tree".format(part.anchor))

    parent_cover = {s.edge: (s.lo, s.hi) for s in p.parent.segments}
    part_cover = {}
    for part in p.parts:
        for segment in part.segments:
            part_cover.setdefault(segment.edge, []).append((segment.lo, segment.hi))

    gaps, overlaps, outside = [], [], []
    for edge_id in sorted(set(parent_cover) | set(part_cover)):
        lo, hi = parent_cover.get(edge_id, (0.0, 0.0))
        intervals = part_cover.get(edge_id, [])
        points = sorted({lo, hi} | {a for a, _ in intervals} | {b for _, b in intervals})
        for left, right in zip(points, points[1:]):
            if right - left <= MEASURE_TOL:
                continue
            middle = 0.5 * (left + right)
            count = sum(1 for a, b in intervals if a <= middle <= b)
            inside = lo <= middle <= hi and edge_id in parent_cover
            witness = host.tree.location(edge_id, middle)
            if inside and count == 0:
                gaps.append(witness)
            elif count > 1:
                overlaps.append(witness)
            elif not inside and count > 0:
                outside.append(witness)

    parts_length = math.fsum(part.length() for part in p.parts)
    report = PartitionReport(
        valid=not (gaps or overlaps or outside),
        parent_length=p.parent.length(),
        parts_length=parts_length,
        gaps=gaps,
        overlaps=overlaps,
        outside=outside,
    )
    if not report.valid:
        LOGGER.warning(report.describe())
        if raise_on_error:
            raise PartitionError(report.describe(), report)
    return report
