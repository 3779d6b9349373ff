"""
Dyadic level sets Z_k of U(x) = int_a^x u^{p'} and the sequences built on them.

Z_k is the closure of {2^{kp'/p} <= U < 2^{(k+1)p'/p}}; its components Z_{k,i} carry
sigma_{k,i}^p = 2^k mu(Z_{k,i}) and B_{k,i}, the number of their boundary points other than
the top one (leaves of the tree included).
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import SNAP
from hardytree.log.logging import Logger
from hardytree.weights import PNorm, StepWeight, integral

LOGGER = Logger.get_logger("hardytree")

TRUNCATION = 1e-12
MAX_LEVELS = 200


@dataclass(frozen=True)
class SigmaComponent:
    subtree: Subtree
    mu: float
    sigma: float
    B: int


@dataclass(frozen=True)
class SigmaLevel:
    k: int
    components: Tuple[SigmaComponent, ...]
    sigma: float


@dataclass(frozen=True)
class SigmaTable:
    """
    Admissible levels from the top down to the truncation.

    `lowest_k` is the last level computed and `truncated_mass` bounds 2^k mu({U < 2^{kp'/p}}) there.
    """

    p: PNorm
    levels: Tuple[SigmaLevel, ...]
    lowest_k: Optional[int]
    truncated_mass: float

    def sigma_ki(self) -> List[float]:
        return [c.sigma for level in self.levels for c in level.components]

    def sigma_k(self) -> List[float]:
        return [level.sigma for level in self.levels]

    def weighted_ki(self) -> List[float]:
        """B_{k,i}^{1/p'} sigma_{k,i}."""
        exponent = 1.0 / self.p.conjugate
        return [c.B ** exponent * c.sigma for level in self.levels for c in level.components]

    def weighted_k(self) -> List[float]:
        """sum_i B_{k,i}^{1/p'} sigma_{k,i}, one value per level."""
        exponent = 1.0 / self.p.conjugate
        return [math.fsum(c.B ** exponent * c.sigma for c in level.components) for level in self.levels]

    def rows(self) -> List[dict]:
        return [
            {"k": level.k, "i": i + 1, "mu": c.mu, "sigma": c.sigma, "B": c.B}
            for level in self.levels
            for i, c in enumerate(level.components)
        ]

    def __len__(self):
        return len(self.levels)


@dataclass(frozen=True)
class SequenceNorms:
    values: Tuple[float, ...]

    @classmethod
    def of(cls, values: Sequence[float]) -> "SequenceNorms":
        return cls(tuple(abs(float(x)) for x in values))

    def lq(self, q: float) -> float:
        if not self.values:
            return 0.0
        if math.isinf(q):
            return max(self.values)
        return math.fsum(x ** q for x in self.values) ** (1.0 / q)

    def weak(self, q: float) -> float:
        """sup_j x*_j j^{1/q}, the weak-l^q quasi-norm."""
        ordered = np.sort(np.asarray(self.values, dtype=float))[::-1]
        if not ordered.size:
            return 0.0
        return float(np.max(ordered * np.arange(1, ordered.size + 1) ** (1.0 / q)))


class LevelGeometry:
    """U along every segment of G, as values at the step breakpoints of u^{p'}."""

    def __init__(self, G: Subtree, u: StepWeight, v: Optional[StepWeight], p: PNorm):
        self.G = G
        self.p = p
        self.exponent = p.conjugate
        self.tables = []
        base: Dict[int, float] = {}
        for index, segment in enumerate(G.segments):
            start = 0.0 if segment.parent is None else base[segment.parent]
            pieces = u.profiles[segment.edge].pieces(segment.lo, segment.hi)
            offsets = [segment.lo] + [b for _, b, _ in pieces]
            increments = [(b - a) * (value ** self.exponent if value > 0 else 0.0) for a, b, value in pieces]
            values = start + np.concatenate(([0.0], np.cumsum(increments)))
            self.tables.append((np.asarray(offsets), values))
            base[index] = float(values[-1])
        self.v = v
        self.top = max(float(values[-1]) for _, values in self.tables)

    def at(self, index: int, offset: float) -> float:
        offsets, values = self.tables[index]
        return float(np.interp(offset, offsets, values))

    def reach(self, index: int, level: float) -> float:
        """Smallest offset on the segment where U >= level (the segment end if never)."""
        offsets, values = self.tables[index]
        if values[0] >= level:
            return float(offsets[0])
        if values[-1] < level:
            return float(offsets[-1])
        j = int(np.searchsorted(values, level, side="left"))
        a, b = values[j - 1], values[j]
        return float(offsets[j - 1] + (offsets[j] - offsets[j - 1]) * (level - a) / (b - a))

    def band(self, index: int, lo: float, hi: float) -> Optional[Tuple[float, float]]:
        segment = self.G.segments[index]
        start, end = self.reach(index, lo), self.reach(index, hi)
        _, values = self.tables[index]
        if values[0] >= hi or values[-1] < lo:
            return None
        if values[-1] < hi:
            end = segment.hi
        if end - start <= SNAP:
            return None
        return start, end

    def mass_below(self, level: float, power: float) -> float:
        total = []
        for index, segment in enumerate(self.G.segments):
            stop = self.reach(index, level)
            total.append(self.v.profiles[segment.edge].integral(power, segment.lo, stop))
        return math.fsum(total)


def _components(G: Subtree, bands: Dict[int, Tuple[float, float]]) -> List[List[Tuple[str, float, float]]]:
    """Connected components of the closed bands, joined through shared vertices."""
    tree = G.host.tree
    graph = nx.Graph()
    graph.add_nodes_from(bands)
    at_vertex: Dict[object, List[int]] = {}
    for index, (lo, hi) in bands.items():
        edge = tree.edges[G.segments[index].edge]
        if lo <= SNAP:
            at_vertex.setdefault(edge.source, []).append(index)
        if hi >= edge.length - SNAP:
            at_vertex.setdefault(edge.target, []).append(index)
    for members in at_vertex.values():
        graph.add_edges_from(zip(members, members[1:]))
    return [
        [(G.segments[i].edge,) + bands[i] for i in sorted(component)]
        for component in sorted(nx.connected_components(graph), key=min)
    ]


def sigma_table(G: Subtree, u: StepWeight, v: StepWeight, p) -> SigmaTable:
    """
    The level sets of U over G (rooted at its anchor) with their sigma and B values.

        :param G: The tree as a subtree of its rooted host, typically Subtree.whole.
        :raises UnsupportedExponentError: unless 1 < p < inf.
    """
    p = PNorm.parse(p)
    if not (p.is_finite and p.p > 1):
        raise UnsupportedExponentError("Level sets of U are defined for 1 < p < inf")
    geometry = LevelGeometry(G, u, v, p)
    if geometry.top <= 0:
        LOGGER.info("u vanishes on the tree; the sigma table is empty")
        return SigmaTable(p, (), None, 0.0)

    ratio = p.conjugate / p.p
    k = math.floor(math.log2(geometry.top) / ratio)
    levels: List[SigmaLevel] = []
    accumulated, remaining, lowest = 0.0, 0.0, None
    for _ in range(MAX_LEVELS):
        lo, hi = 2.0 ** (k * ratio), 2.0 ** ((k + 1) * ratio)
        bands = {}
        for index in range(len(G.segments)):
            band = geometry.band(index, lo, hi)
            if band is not None:
                bands[index] = band
        components = []
        for pieces in _components(G, bands):
            part = Subtree.from_segments(G.host, pieces)
            mass = integral(v, part, p.p)
            if mass <= 0:
                continue
            components.append(SigmaComponent(part, mass, (2.0 ** k * mass) ** (1.0 / p.p), len(part.ends())))
        if components:
            sigma_p = math.fsum(c.sigma ** p.p for c in components)
            levels.append(SigmaLevel(k, tuple(components), sigma_p ** (1.0 / p.p)))
            accumulated += sigma_p
        lowest = k
        remaining = 2.0 ** k * geometry.mass_below(lo, p.p)
        if remaining <= TRUNCATION * accumulated:
            break
        k -= 1
    else:
        LOGGER.warning("Sigma table stopped after {} levels with residual {:.3e}".format(MAX_LEVELS, remaining))
    LOGGER.debug("Sigma table: {} levels down to k={}".format(len(levels), lowest))
    return SigmaTable(p, tuple(levels), lowest, remaining)


@dataclass(frozen=True)
class RegularTreeCondition:
    bound: float
    largest_B: int
    holds: bool


def regular_tree_condition(table: SigmaTable, branching: int, ratio: float) -> RegularTreeCondition:
    """
    B_{k,i} <= b^ceil(log 2 / log mu_1 + 1) for a regular b-ary tree whose edge lengths grow by mu_1.

        :raises DomainError: unless b >= 1 and mu_1 > 1.
    """
    if branching < 1 or not ratio > 1:
        raise DomainError("Need branching >= 1 and length ratio > 1")
    bound = float(branching) ** math.ceil(math.log(2.0) / math.log(ratio) + 1.0)
    largest = max((c.B for level in table.levels for c in level.components), default=0)
    return RegularTreeCondition(bound, largest, largest <= bound)
