"""Quadrature discretization of the Hardy operator on a subtree."""
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from hardytree.exceptions import DomainError, ShapeError, WeightError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import SNAP, Location
from hardytree.log.logging import Logger
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")

DEFAULT_GRID = 256
# Above this many nodes the top singular value comes from ARPACK instead of a dense SVD.
DENSE_SVD_LIMIT = 600


def _overlap(a: np.ndarray, b: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Fraction of each cell [edges[k], edges[k+1]] covered by [a_i, b_i], one row per interval."""
    left = np.maximum(a[:, None], edges[None, :-1])
    right = np.minimum(b[:, None], edges[None, 1:])
    return np.clip(right - left, 0.0, None) / np.diff(edges)[None, :]


def top_singular_value(matrix: np.ndarray) -> float:
    if not matrix.size or not np.any(matrix):
        return 0.0
    if min(matrix.shape) <= DENSE_SVD_LIMIT:
        return float(scipy.linalg.svdvals(matrix, check_finite=False)[0])
    v0 = np.random.default_rng(0).standard_normal(min(matrix.shape))
    value = scipy.sparse.linalg.svds(matrix, k=1, v0=v0, return_singular_vectors=False)
    return float(value[0])


def top_right_singular_vector(matrix: np.ndarray) -> np.ndarray:
    if min(matrix.shape) <= DENSE_SVD_LIMIT:
        _, _, vt = scipy.linalg.svd(matrix, full_matrices=False, check_finite=False)
        return vt[0]
    v0 = np.random.default_rng(0).standard_normal(min(matrix.shape))
    _, _, vt = scipy.sparse.linalg.svds(matrix, k=1, v0=v0)
    return vt[0]


class DiscretizedOperator:
    """
    The Hardy operator T_b restricted to a subtree K, on a midpoint grid.

    Every segment of K (or every piece of it between `breaks`) carries `n` uniform cells with
    nodes at the cell midpoints. Row i of the kernel holds, for each cell j, the fraction of
    cell j lying on the path from the root b to node i, so that
    (Tf)(x_i) = v(x_i) * sum_j coverage[i, j] * u(x_j) f(x_j) q_j.

        :param K: The subtree.
        :param u: Inner weight on K's host tree.
        :param v: Outer weight on K's host tree.
        :param p: Exponent of the Lebesgue space.
        :param n: Cells per segment piece.
        :param root: Host location inside K used as the root b, defaults to the anchor.
        :param breaks: Extra cell boundaries per edge id.
    """

    def __init__(
        self,
        K: Subtree,
        u: StepWeight,
        v: StepWeight,
        p,
        n: int = DEFAULT_GRID,
        root: Optional[Location] = None,
        breaks: Optional[Mapping[str, Sequence[float]]] = None,
    ) -> None:
        if K.is_point():
            raise DomainError("Cannot discretize a single-point subtree")
        if int(n) < 1:
            raise DomainError("Grid needs at least one cell per segment, got {}".format(n))
        for w in (u, v):
            if w.tree is not K.host.tree:
                raise WeightError("Weights must live on the subtree's host tree")
        self.K = K
        self.u_weight, self.v_weight = u, v
        self.p = PNorm.parse(p)
        self.n = int(n)
        self.root = K.anchor if root is None else K.host.tree.check(root)
        if not K.contains(self.root):
            raise DomainError("Root {!r} is not in the subtree".format(self.root))

        breaks = breaks or {}
        self.cell_edges: List[np.ndarray] = []
        for segment in K.segments:
            points = [segment.lo]
            for b in sorted(breaks.get(segment.edge, ())):
                if segment.lo + SNAP < b < segment.hi - SNAP and b - points[-1] > SNAP:
                    points.append(b)
            points.append(segment.hi)
            parts = [np.linspace(a, b, self.n + 1)[:-1] for a, b in zip(points, points[1:])]
            self.cell_edges.append(np.concatenate(parts + [[segment.hi]]))

        sizes = [edges.size - 1 for edges in self.cell_edges]
        self.starts = np.concatenate(([0], np.cumsum(sizes)))
        self.size = int(self.starts[-1])
        self.segment_index = np.repeat(np.arange(len(sizes)), sizes)
        self.x = np.concatenate([0.5 * (e[:-1] + e[1:]) for e in self.cell_edges])
        self.q = np.concatenate([np.diff(e) for e in self.cell_edges])
        self.u = np.concatenate(
            [u.profiles[s.edge].sample(self.x[self._block(i)]) for i, s in enumerate(K.segments)]
        )
        self.v = np.concatenate(
            [v.profiles[s.edge].sample(self.x[self._block(i)]) for i, s in enumerate(K.segments)]
        )

        self.root_segment, self.root_offset = self._place(self.root)
        self._routes = self._route_table()
        self.coverage = np.vstack(
            [self._rows(i, self.x[self._block(i)]) for i in range(len(K.segments))]
        )
        self.matrix = self.v[:, None] * self.coverage * (self.u * self.q)[None, :]
        LOGGER.debug(
            "Assembled operator on {} segments, {} nodes, root {!r}".format(
                len(K.segments), self.size, self.root
            )
        )

    def _block(self, index: int) -> slice:
        return slice(int(self.starts[index]), int(self.starts[index + 1]))

    def _place(self, location: Location) -> Tuple[int, float]:
        """(segment index, host offset) of a location in K."""
        tree = self.K.host.tree
        location = tree.check(location)
        for index, segment in enumerate(self.K.segments):
            edge = tree.edges[segment.edge]
            if location.is_vertex:
                if segment.hi >= edge.length and edge.target == location.vertex:
                    return index, segment.hi
                if segment.lo == 0.0 and edge.source == location.vertex:
                    return index, segment.lo
            elif location.edge == segment.edge and segment.lo - SNAP <= location.offset <= segment.hi + SNAP:
                return index, location.offset
        if location == self.K.anchor:
            return 0, self.K.segments[0].lo
        raise DomainError("{!r} is not in the subtree".format(location))

    def _ancestors(self, index: int) -> List[int]:
        chain = []
        parent = self.K.segments[index].parent
        while parent is not None:
            chain.append(parent)
            parent = self.K.segments[parent].parent
        return chain

    def _route_table(self) -> Dict[int, Tuple[bool, List[int], bool]]:
        """
        Per segment s != root segment: (s traversed forward, fully traversed segments,
        root segment left through its lower end).
        """
        rb = self.root_segment
        above_root = self._ancestors(rb)
        routes = {}
        for index in range(len(self.K.segments)):
            if index == rb:
                continue
            chain = self._ancestors(index)
            if rb in chain:
                full = chain[: chain.index(rb)]
                routes[index] = (True, full, True)
            elif index in above_root:
                full = above_root[: above_root.index(index)]
                routes[index] = (False, full, False)
            else:
                common = next((c for c in chain if c in above_root), None)
                up = above_root if common is None else above_root[: above_root.index(common)]
                down = chain if common is None else chain[: chain.index(common)]
                routes[index] = (True, up + down, False)
        return routes

    def _rows(self, index: int, xs: np.ndarray) -> np.ndarray:
        """Coverage rows of the paths from the root to the points xs on segment `index`."""
        xs = np.asarray(xs, dtype=float)
        rows = np.zeros((xs.size, self.size))
        rb, tb = self.root_segment, self.root_offset
        segment = self.K.segments[index]
        if index == rb:
            rows[:, self._block(rb)] = _overlap(np.minimum(tb, xs), np.maximum(tb, xs), self.cell_edges[rb])
            return rows
        forward, full, lower = self._routes[index]
        if forward:
            rows[:, self._block(index)] = _overlap(np.full_like(xs, segment.lo), xs, self.cell_edges[index])
        else:
            rows[:, self._block(index)] = _overlap(xs, np.full_like(xs, segment.hi), self.cell_edges[index])
        for other in full:
            rows[:, self._block(other)] = 1.0
        root_seg = self.K.segments[rb]
        a, b = (tb, root_seg.hi) if lower else (root_seg.lo, tb)
        rows[:, self._block(rb)] = _overlap(np.array([a]), np.array([b]), self.cell_edges[rb])
        return rows

    def path_row(self, location: Location) -> np.ndarray:
        """Coverage of the path from the root to `location`, one entry per cell."""
        index, offset = self._place(location)
        return self._rows(index, np.array([offset]))[0]

    def nodes_in(self, part: Subtree) -> np.ndarray:
        """Boolean mask of the nodes lying in `part`."""
        mask = np.zeros(self.size, dtype=bool)
        extents = {s.edge: (s.lo, s.hi) for s in part.segments}
        for index, segment in enumerate(self.K.segments):
            if segment.edge in extents:
                lo, hi = extents[segment.edge]
                block = self._block(index)
                mask[block] = (self.x[block] >= lo) & (self.x[block] <= hi)
        return mask

    @property
    def weighted_matrix(self) -> np.ndarray:
        """The matrix of T between quadrature-weighted l2 spaces (orthonormal coordinates)."""
        root_q = np.sqrt(self.q)
        return root_q[:, None] * self.matrix / root_q[None, :]

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """T* g for the pairing sum_i q_i f_i g_i."""
        return (self.matrix.T @ (self.q * g)) / self.q

    def norm_of(self, f: np.ndarray, p: Optional[PNorm] = None) -> float:
        p = self.p if p is None else PNorm.parse(p)
        f = np.abs(np.asarray(f, dtype=float))
        if not p.is_finite:
            return float(np.max(f)) if f.size else 0.0
        return float(np.sum(self.q * f ** p.p) ** (1.0 / p.p))


def apply(T: DiscretizedOperator, f) -> np.ndarray:
    """
    (Tf)(x_i) on the grid of T.

        :raises ShapeError: if f is not sampled on T's grid.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (T.size,):
        raise ShapeError("Expected a grid vector of shape ({},), got {}".format(T.size, f.shape))
    return T.matrix @ f
