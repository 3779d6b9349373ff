"""Rooted metric trees: locations, rooting, paths and the partial order."""
import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Tuple

import networkx as nx

from hardytree.exceptions import InvalidLocationError, TreeStructureError
from hardytree.log.logging import Logger

LOGGER = Logger.get_logger("hardytree")

SNAP = 1e-12


@dataclass(frozen=True)
class Edge:
    id: str
    source: Hashable
    target: Hashable
    length: float


@dataclass(frozen=True, eq=False)
class Location:
    """
    A point of a metric tree: either a vertex or an edge-interior offset.

    Offsets are measured from the edge's source endpoint. Build locations through
    MetricTree.location / MetricTree.vertex_location so that endpoints snap to vertices.
    """

    edge: Optional[str] = None
    offset: float = 0.0
    vertex: Optional[Hashable] = None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    @property
    def key(self):
        if self.is_vertex:
            return ("v", self.vertex)
        return ("e", self.edge, self.offset)

    def __eq__(self, other):
        return isinstance(other, Location) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        if self.is_vertex:
            return "Location(vertex={!r})".format(self.vertex)
        return "Location(edge={!r}, offset={!r})".format(self.edge, self.offset)


@dataclass(frozen=True)
class PathStep:
    """A traversed piece of an edge; start > end means travel against the edge orientation."""

    edge: str
    start: float
    end: float

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def reversed(self) -> "PathStep":
        return PathStep(self.edge, self.end, self.start)


class MetricTree:
    """
    A finite metric tree.

        :param vertices: Iterable of hashable vertex ids.
        :param edges: Iterable of Edge (or (id, source, target, length) tuples).
        :raises TreeStructureError: if the graph is not a tree or a length is not positive and finite.
    """

    def __init__(self, vertices, edges) -> None:
        self.vertices = tuple(vertices)
        self.edges: Dict[str, Edge] = {}
        for item in edges:
            edge = item if isinstance(item, Edge) else Edge(str(item[0]), item[1], item[2], float(item[3]))
            if edge.id in self.edges:
                raise TreeStructureError("Duplicate edge id: {}".format(edge.id))
            if not (math.isfinite(edge.length) and edge.length > 0):
                raise TreeStructureError(
                    "Edge {} has invalid length {}".format(edge.id, edge.length)
                )
            if edge.source == edge.target:
                raise TreeStructureError("Edge {} is a loop".format(edge.id))
            self.edges[edge.id] = edge

        if len(set(self.vertices)) != len(self.vertices):
            raise TreeStructureError("Duplicate vertex ids")
        if not self.edges:
            raise TreeStructureError("A metric tree needs at least one edge")

        self.graph = nx.Graph()
        self.graph.add_nodes_from(self.vertices)
        for edge in self.edges.values():
            for end in (edge.source, edge.target):
                if end not in self.graph:
                    raise TreeStructureError(
                        "Edge {} references unknown vertex {!r}".format(edge.id, end)
                    )
            if self.graph.has_edge(edge.source, edge.target):
                raise TreeStructureError(
                    "Edges {} and {} form a cycle".format(
                        self.graph.edges[edge.source, edge.target]["id"], edge.id
                    )
                )
            self.graph.add_edge(edge.source, edge.target, id=edge.id, length=edge.length)

        if not nx.is_tree(self.graph):
            raise TreeStructureError(
                "Graph with {} vertices and {} edges is not a tree".format(
                    len(self.vertices), len(self.edges)
                )
            )

    def edge(self, edge_id) -> Edge:
        try:
            return self.edges[edge_id]
        except KeyError:
            raise InvalidLocationError("Unknown edge: {}".format(edge_id)) from None

    def incident_edges(self, vertex) -> List[str]:
        if vertex not in self.graph:
            raise InvalidLocationError("Unknown vertex: {!r}".format(vertex))
        return [data["id"] for _, _, data in self.graph.edges(vertex, data=True)]

    def degree(self, vertex) -> int:
        return self.graph.degree(vertex)

    def leaves(self) -> List[Hashable]:
        return [vertex for vertex in self.vertices if self.graph.degree(vertex) == 1]

    def total_length(self) -> float:
        return math.fsum(edge.length for edge in self.edges.values())

    def vertex_location(self, vertex) -> Location:
        if vertex not in self.graph:
            raise InvalidLocationError("Unknown vertex: {!r}".format(vertex))
        return Location(vertex=vertex)

    def location(self, edge_id, offset: float) -> Location:
        """
        Canonical location on an edge; offsets within SNAP of an endpoint map to the vertex.

            :raises InvalidLocationError: if the edge is unknown or the offset is off the edge.
        """
        edge = self.edge(edge_id)
        offset = float(offset)
        if not math.isfinite(offset) or offset < -SNAP or offset > edge.length + SNAP:
            raise InvalidLocationError(
                "Offset {} is outside edge {} of length {}".format(offset, edge_id, edge.length)
            )
        if offset <= SNAP:
            return Location(vertex=edge.source)
        if offset >= edge.length - SNAP:
            return Location(vertex=edge.target)
        return Location(edge=edge.id, offset=offset)

    def check(self, location: Location) -> Location:
        """Re-canonicalizes a location and verifies it lies on this tree."""
        if location.is_vertex:
            return self.vertex_location(location.vertex)
        return self.location(location.edge, location.offset)


class RootedTree:
    """
    A metric tree with a root vertex and every edge oriented from parent to child.

    `origin` maps each edge id to (unrooted edge id, base offset, direction) so that a point
    at offset s on the rooted edge sits at base + direction * s on the unrooted one.
    """

    def __init__(self, tree: MetricTree, root, origin=None, source: Optional[MetricTree] = None):
        self.tree = tree
        self.root = root
        self.source = source if source is not None else tree
        self.origin: Dict[str, Tuple[str, float, int]] = origin or {
            edge_id: (edge_id, 0.0, 1) for edge_id in tree.edges
        }
        self.parent_edge: Dict[Hashable, str] = {}
        self.children: Dict[Hashable, List[str]] = {vertex: [] for vertex in tree.vertices}
        self.edge_order: List[str] = []
        for parent, child in nx.bfs_edges(tree.graph, root):
            edge_id = tree.graph.edges[parent, child]["id"]
            edge = tree.edges[edge_id]
            if edge.source != parent:
                raise TreeStructureError(
                    "Edge {} is not oriented away from root {!r}".format(edge_id, root)
                )
            self.parent_edge[child] = edge_id
            self.children[parent].append(edge_id)
            self.edge_order.append(edge_id)

    @property
    def root_location(self) -> Location:
        return Location(vertex=self.root)

    def location(self, edge_id, offset) -> Location:
        return self.tree.location(edge_id, offset)

    def lift(self, location: Location) -> Location:
        """Maps a location of the unrooted source tree onto this rooted tree."""
        if location.is_vertex:
            return self.tree.vertex_location(location.vertex)
        self.source.check(location)
        for edge_id, (old_id, base, direction) in self.origin.items():
            if old_id != location.edge:
                continue
            offset = (location.offset - base) * direction
            if -SNAP <= offset <= self.tree.edges[edge_id].length + SNAP:
                return self.tree.location(edge_id, offset)
        raise InvalidLocationError("{!r} is not on the source tree".format(location))

    def root_path(self, location: Location) -> List[PathStep]:
        """Steps from the root down to `location`, every step increasing in offset."""
        location = self.tree.check(location)
        if location.is_vertex:
            vertex, steps = location.vertex, []
        else:
            steps = [PathStep(location.edge, 0.0, location.offset)]
            vertex = self.tree.edges[location.edge].source
        while vertex != self.root:
            edge_id = self.parent_edge[vertex]
            steps.append(PathStep(edge_id, 0.0, self.tree.edges[edge_id].length))
            vertex = self.tree.edges[edge_id].source
        steps.reverse()
        return steps

    def depth(self, location: Location) -> float:
        return math.fsum(step.length for step in self.root_path(location))

    def is_leaf(self, vertex) -> bool:
        return not self.children[vertex]


def root_at(tree: MetricTree, a: Location) -> RootedTree:
    """
    Roots `tree` at `a`, splitting the edge when `a` is edge-interior.

        :param tree: The unrooted metric tree.
        :param a: Root location.
        :return: RootedTree with edges oriented away from the root.
        :raises InvalidLocationError: if `a` is not on the tree.
    """
    a = tree.check(a)
    vertices = list(tree.vertices)
    pieces = []
    if a.is_vertex:
        root = a.vertex
        pieces = [(edge.id, edge.source, edge.target, edge.length, edge.id, 0.0, 1)
                  for edge in tree.edges.values()]
    else:
        root = "{}@{!r}".format(a.edge, a.offset)
        while root in tree.graph:
            root = root + "'"
        vertices.append(root)
        for edge in tree.edges.values():
            if edge.id != a.edge:
                pieces.append((edge.id, edge.source, edge.target, edge.length, edge.id, 0.0, 1))
                continue
            pieces.append(("{}.a".format(edge.id), root, edge.source, a.offset, edge.id, a.offset, -1))
            pieces.append(
                ("{}.b".format(edge.id), root, edge.target, edge.length - a.offset, edge.id, a.offset, 1)
            )
        LOGGER.debug("Split edge {} at offset {} to place the root".format(a.edge, a.offset))

    split = MetricTree(vertices, [Edge(p[0], p[1], p[2], p[3]) for p in pieces])
    origin = {p[0]: (p[4], p[5], p[6]) for p in pieces}
    parent_of = dict(nx.bfs_predecessors(split.graph, root))

    oriented = []
    for edge_id, source, target, length, old_id, base, direction in pieces:
        if parent_of.get(target) == source:
            oriented.append(Edge(edge_id, source, target, length))
        else:
            oriented.append(Edge(edge_id, target, source, length))
            origin[edge_id] = (old_id, base + direction * length, -direction)
    return RootedTree(MetricTree(vertices, oriented), root, origin, source=tree)


def path(t: RootedTree, x: Location, y: Location) -> List[PathStep]:
    """
    The unique path from x to y as ordered edge pieces.

        :return: List of PathStep; empty when x == y.
    """
    px, py = t.root_path(x), t.root_path(y)
    common = 0
    while (
        common < len(px)
        and common < len(py)
        and px[common] == py[common]
        and px[common].end >= t.tree.edges[px[common].edge].length
    ):
        common += 1
    rx, ry = px[common:], py[common:]
    if rx and ry and rx[0].edge == ry[0].edge:
        hx, hy = rx[0].end, ry[0].end
        if abs(hx - hy) <= SNAP and len(rx) == 1 and len(ry) == 1:
            return []
        if hx < hy:
            return [PathStep(rx[0].edge, hx, hy)] + ry[1:]
        return [step.reversed() for step in reversed(rx[1:])] + [PathStep(rx[0].edge, hx, hy)]
    return [step.reversed() for step in reversed(rx)] + ry


def distance(t: RootedTree, x: Location, y: Location) -> float:
    return math.fsum(step.length for step in path(t, x, y))


def precedes(t: RootedTree, x: Location, y: Location) -> bool:
    """True iff x lies on the path from the root to y."""
    x, y = t.tree.check(x), t.tree.check(y)
    if x == y or (x.is_vertex and x.vertex == t.root):
        return True
    for step in t.root_path(y):
        if x.is_vertex:
            if t.tree.edges[step.edge].source == x.vertex:
                return True
        elif step.edge == x.edge and x.offset <= step.end + SNAP:
            return True
    return False
