"""
Piecewise-constant weights on metric trees and their integral functionals.

All functionals are exact sums over step pieces, so discretization error only enters
through the operator grids.
"""
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from hardytree.exceptions import DomainError, UnsupportedExponentError, WeightError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import SNAP, Location, MetricTree, RootedTree
from hardytree.log.logging import Logger

LOGGER = Logger.get_logger("hardytree")

LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class PNorm:
    """Lebesgue exponent p in [1, inf] with its conjugate."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise DomainError("Exponent p must satisfy p >= 1, got {}".format(self.p))
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, value) -> "PNorm":
        if isinstance(value, PNorm):
            return value
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo"):
            return cls(math.inf)
        return cls(float(value))

    @property
    def conjugate(self) -> float:
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def dual(self) -> "PNorm":
        return PNorm(self.conjugate)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.p)

    def __str__(self):
        return "inf" if math.isinf(self.p) else "{:g}".format(self.p)


class StepProfile:
    """
    A nonnegative step function on (0, L) given as consecutive (length, value) pieces.

        :param lengths: Positive piece lengths.
        :param values: Nonnegative piece values.
    """

    def __init__(self, lengths: Sequence[float], values: Sequence[float]) -> None:
        self.lengths = np.asarray(lengths, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.lengths.ndim != 1 or self.lengths.shape != self.values.shape or not self.lengths.size:
            raise WeightError("Step profile needs matching, non-empty lengths and values")
        if np.any(~np.isfinite(self.lengths)) or np.any(self.lengths <= 0):
            raise WeightError("Step piece lengths must be positive and finite")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise WeightError("Step values must be nonnegative and finite")
        self.breaks = np.concatenate(([0.0], np.cumsum(self.lengths)))

    @classmethod
    def constant(cls, length: float, value: float) -> "StepProfile":
        return cls([length], [value])

    @property
    def length(self) -> float:
        return float(self.breaks[-1])

    def pieces(self, lo: float = 0.0, hi: Optional[float] = None) -> List[Tuple[float, float, float]]:
        """(start, end, value) pieces intersected with [lo, hi], in absolute offsets."""
        hi = self.length if hi is None else hi
        out = []
        for start, end, value in zip(self.breaks[:-1], self.breaks[1:], self.values):
            a, b = max(start, lo), min(end, hi)
            if b - a > SNAP:
                out.append((float(a), float(b), float(value)))
        return out

    def integral(self, power: float = 1.0, lo: float = 0.0, hi: Optional[float] = None) -> float:
        return math.fsum((b - a) * v ** power for a, b, v in self.pieces(lo, hi) if v > 0)

    def sup(self, lo: float = 0.0, hi: Optional[float] = None) -> float:
        return max((v for _, _, v in self.pieces(lo, hi)), default=0.0)

    def value_at(self, offset: float, side: str = "right") -> float:
        index = np.searchsorted(self.breaks, offset, side=side) - 1
        index = min(max(index, 0), self.values.size - 1)
        return float(self.values[index])

    def sample(self, offsets) -> np.ndarray:
        offsets = np.asarray(offsets, dtype=float)
        index = np.clip(np.searchsorted(self.breaks, offsets, side="right") - 1, 0, self.values.size - 1)
        return self.values[index]

    def clipped(self, lo: float, hi: float) -> "StepProfile":
        pieces = self.pieces(lo, hi)
        return StepProfile([b - a for a, b, _ in pieces], [v for _, _, v in pieces])

    def reversed(self) -> "StepProfile":
        return StepProfile(self.lengths[::-1], self.values[::-1])

    def distribution(self, t: float) -> float:
        """Measure of {g > t}."""
        return float(np.sum(self.lengths[self.values > t]))

    def combine(self, other: "StepProfile", fn: Callable[[float, float], float]) -> "StepProfile":
        """Pointwise fn(self, other) on the common refinement of both profiles."""
        if abs(self.length - other.length) > LENGTH_TOL:
            raise WeightError("Cannot combine profiles of lengths {} and {}".format(self.length, other.length))
        points = np.unique(np.concatenate((self.breaks, other.breaks * (self.length / other.length))))
        keep = np.concatenate(([True], np.diff(points) > SNAP))
        points = points[keep]
        mids = 0.5 * (points[:-1] + points[1:])
        values = [fn(a, b) for a, b in zip(self.sample(mids), other.sample(mids))]
        return StepProfile(np.diff(points), values).merged()

    def merged(self) -> "StepProfile":
        lengths, values = [], []
        for length, value in zip(self.lengths, self.values):
            if values and values[-1] == value:
                lengths[-1] += length
            else:
                lengths.append(float(length))
                values.append(float(value))
        return StepProfile(lengths, values)

    def __repr__(self):
        return "StepProfile({})".format(list(zip(self.lengths.tolist(), self.values.tolist())))


PieceList = Union[StepProfile, Iterable[Tuple[float, float]]]


class StepWeight:
    """
    A piecewise-constant nonnegative weight, one StepProfile per edge oriented from the edge's source.

        :param tree: The tree the weight lives on.
        :param profiles: Mapping edge id -> StepProfile or list of (length, value) pieces.
        :raises WeightError: naming the edge when pieces do not sum to the edge length.
    """

    def __init__(self, tree: MetricTree, profiles: Mapping[str, PieceList]) -> None:
        self.tree = tree
        self.profiles = {}
        for edge_id, edge in tree.edges.items():
            if edge_id not in profiles:
                raise WeightError("Edge {} has no weight pieces".format(edge_id), edge=edge_id)
            profile = profiles[edge_id]
            if not isinstance(profile, StepProfile):
                pieces = list(profile)
                try:
                    profile = StepProfile([p[0] for p in pieces], [p[1] for p in pieces])
                except WeightError as e:
                    raise WeightError("Edge {}: {}".format(edge_id, e), edge=edge_id) from None
            if abs(profile.length - edge.length) > LENGTH_TOL:
                raise WeightError(
                    "Weight pieces of edge {} sum to {} but the edge has length {}".format(
                        edge_id, profile.length, edge.length
                    ),
                    edge=edge_id,
                )
            if profile.length != edge.length:
                lengths = profile.lengths.copy()
                lengths[-1] += edge.length - profile.length
                profile = StepProfile(lengths, profile.values)
            self.profiles[edge_id] = profile
        extra = set(profiles) - set(tree.edges)
        if extra:
            raise WeightError("Weight given for unknown edges: {}".format(sorted(extra)))

    @classmethod
    def constant(cls, tree: MetricTree, value: float = 1.0) -> "StepWeight":
        return cls(tree, {e: StepProfile.constant(edge.length, value) for e, edge in tree.edges.items()})

    def profile(self, edge_id) -> StepProfile:
        return self.profiles[edge_id]

    def value_at(self, location: Location) -> float:
        location = self.tree.check(location)
        if location.is_vertex:
            return local_ess_sup(self, location)
        return self.profiles[location.edge].value_at(location.offset)

    def scaled(self, factor: float) -> "StepWeight":
        factor = abs(factor)
        return StepWeight(
            self.tree, {e: StepProfile(p.lengths, p.values * factor) for e, p in self.profiles.items()}
        )

    def combine(self, other: "StepWeight", fn: Callable[[float, float], float]) -> "StepWeight":
        if other.tree is not self.tree:
            raise WeightError("Weights live on different trees")
        return StepWeight(self.tree, {e: p.combine(other.profiles[e], fn) for e, p in self.profiles.items()})

    def is_zero(self) -> bool:
        return all(not np.any(p.values > 0) for p in self.profiles.values())

    def on_rooted(self, rooted: RootedTree) -> "StepWeight":
        """The same weight on a rooted (possibly split and reoriented) copy of its tree."""
        if rooted.tree is self.tree:
            return self
        if rooted.source is not self.tree:
            raise WeightError("Rooted tree was not built from this weight's tree")
        profiles = {}
        for edge_id, (old_id, base, direction) in rooted.origin.items():
            length = rooted.tree.edges[edge_id].length
            old = self.profiles[old_id]
            if direction > 0:
                profiles[edge_id] = old.clipped(base, base + length)
            else:
                profiles[edge_id] = old.clipped(base - length, base).reversed()
        return StepWeight(rooted.tree, profiles)

    def restricted(self, K: Subtree) -> "StepWeight":
        """The weight on K.local_tree."""
        _check_host(self, K)
        return StepWeight(
            K.local_tree, {s.edge: self.profiles[s.edge].clipped(s.lo, s.hi) for s in K.segments}
        )

    def on_local(self, K: Subtree, rooted: RootedTree) -> "StepWeight":
        """The weight on K rerooted, as returned by K.as_rooted()."""
        return self.restricted(K).on_rooted(rooted)

    def __repr__(self):
        return "StepWeight({})".format(self.profiles)


def _check_host(w: StepWeight, K: Subtree) -> None:
    if w.tree is not K.host.tree:
        raise WeightError("Weight and subtree live on different trees; use StepWeight.on_rooted")


def _pieces_on(w: StepWeight, K: Subtree):
    _check_host(w, K)
    for segment in K.segments:
        for piece in w.profiles[segment.edge].pieces(segment.lo, segment.hi):
            yield piece


def lp_norm(w: StepWeight, p: PNorm, K: Subtree) -> float:
    """
    Exact L^p norm of w over K.

        :param w: The step weight.
        :param p: The exponent.
        :param K: The subtree; a single point gives 0.
    """
    p = PNorm.parse(p)
    pieces = list(_pieces_on(w, K))
    if not pieces:
        return 0.0
    if not p.is_finite:
        return max(v for _, _, v in pieces)
    return math.fsum((b - a) * v ** p.p for a, b, v in pieces if v > 0) ** (1.0 / p.p)


def integral(w: StepWeight, K: Subtree, power: float = 1.0) -> float:
    return math.fsum((b - a) * v ** power for a, b, v in _pieces_on(w, K) if v > 0)


def mu(K: Subtree, v: StepWeight, p: PNorm) -> float:
    """The measure mu(K) = int_K v^p, or int_K v when p is infinite."""
    p = PNorm.parse(p)
    return integral(v, K, p.p if p.is_finite else 1.0)


def integral_product(u: StepWeight, v: StepWeight, K: Subtree, pu: float = 1.0, pv: float = 1.0) -> float:
    """Exact int_K u^pu v^pv over the common refinement of u and v."""
    _check_host(u, K)
    _check_host(v, K)
    total = []
    for segment in K.segments:
        a = u.profiles[segment.edge].clipped(segment.lo, segment.hi)
        b = v.profiles[segment.edge].clipped(segment.lo, segment.hi)
        joint = a.combine(b, lambda x, y: (x ** pu if x > 0 else 0.0) * (y ** pv if y > 0 else 0.0))
        total.append(joint.integral())
    return math.fsum(total)


def primitive_U(t: RootedTree, u: StepWeight, p: PNorm, x: Location) -> float:
    """
    U(x) = int_a^x u^{p'} along the path from the root.

        :raises UnsupportedExponentError: for p = 1, where p' is infinite.
    """
    p = PNorm.parse(p)
    if math.isinf(p.conjugate):
        raise UnsupportedExponentError("U(x) needs a finite conjugate exponent; p = 1 is not supported")
    if u.tree is not t.tree:
        raise WeightError("Weight and rooted tree differ; use StepWeight.on_rooted")
    return math.fsum(
        u.profiles[step.edge].integral(p.conjugate, 0.0, step.end) for step in t.root_path(x)
    )


def descendant_mass(K: Subtree, w: StepWeight, power: float, x: Location) -> float:
    """int of w^power over the points of K that succeed x."""
    _check_host(w, K)
    x = K.host.tree.check(x)
    masses = [w.profiles[s.edge].integral(power, s.lo, s.hi) for s in K.segments]
    below = list(masses)
    for index in range(len(K.segments) - 1, -1, -1):
        parent = K.segments[index].parent
        if parent is not None:
            below[parent] += below[index]

    if x == K.anchor:
        return math.fsum(below[i] for i in K.child_segments(None))
    tree = K.host.tree
    if x.is_vertex:
        tops = [i for i, s in enumerate(K.segments)
                if s.lo == 0.0 and tree.edges[s.edge].source == x.vertex]
        return math.fsum(below[i] for i in tops)
    for index, segment in enumerate(K.segments):
        if segment.edge == x.edge and segment.lo - SNAP <= x.offset <= segment.hi + SNAP:
            rest = below[index] - masses[index]
            return w.profiles[segment.edge].integral(power, x.offset, segment.hi) + rest
    return 0.0


def local_ess_sup(w: StepWeight, x: Location) -> float:
    """
    Local essential supremum of w at x: the largest value on any germ of an edge at x.
    """
    x = w.tree.check(x)
    if not x.is_vertex:
        profile = w.profiles[x.edge]
        return max(profile.value_at(x.offset, "left"), profile.value_at(x.offset, "right"))
    values = []
    for edge_id in w.tree.incident_edges(x.vertex):
        profile = w.profiles[edge_id]
        if w.tree.edges[edge_id].source == x.vertex:
            values.append(float(profile.values[0]))
        else:
            values.append(float(profile.values[-1]))
    return max(values, default=0.0)


def interval_profile(w: StepWeight, I: Union[Subtree, Sequence[Tuple[str, float, float]]]) -> StepProfile:
    """
    The values of w along an interval, as one profile from one end to the other.

        :param I: An interval subtree, or (edge, start, end) pieces where start > end runs backwards.
        :raises DomainError: if I branches.
    """
    chain = I.chain() if isinstance(I, Subtree) else list(I)
    lengths, values = [], []
    for edge_id, start, end in chain:
        pieces = w.profiles[edge_id].pieces(min(start, end), max(start, end))
        if start > end:
            pieces = reversed(pieces)
        for a, b, value in pieces:
            lengths.append(b - a)
            values.append(value)
    if not lengths:
        raise DomainError("Interval has zero length")
    return StepProfile(lengths, values).merged()


def rearrangement(g: Union[StepWeight, StepProfile], I=None) -> StepProfile:
    """
    Nonincreasing rearrangement g* on (0, |I|).

        :param g: A weight (restricted to the interval I) or a profile already laid out along I.
        :param I: Interval subtree or path pieces, required when g is a StepWeight.
        :return: StepProfile with values sorted in decreasing order.
    """
    profile = g if isinstance(g, StepProfile) else interval_profile(g, I)
    order = np.argsort(-profile.values, kind="stable")
    return StepProfile(profile.lengths[order], profile.values[order]).merged()


def sup_rearranged_product(g: StepProfile) -> float:
    """sup_t g*(t) * t over (0, |I|)."""
    star = rearrangement(g)
    ends = np.cumsum(star.lengths)
    return float(np.max(star.values * ends))
