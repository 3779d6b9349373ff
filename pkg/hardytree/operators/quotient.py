"""The quotient functional A(K) and the optimal shift c_f."""
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import Location
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID, DiscretizedOperator, apply, top_singular_value
from hardytree.operators.norms import op_norm, sup_norm
from hardytree.weights import PNorm, StepWeight, mu

LOGGER = Logger.get_logger("hardytree")

ROOT_SAMPLES = 16
TIE_TOL = 1e-12
SHIFT_SAMPLES = 8
GOLDEN_XTOL = 1e-9
GOLDEN_MAXITER = 200


@dataclass(frozen=True)
class AValue:
    """
    A(K) together with how it was obtained.

    `root` is the minimizing root for the min-over-roots method and the operator root otherwise.
    `certified` is False when the value is a formula that was not cross-checked numerically.
    """

    value: float
    root: Location
    method: str
    certified: bool = True


@dataclass(frozen=True)
class Shift:
    c: float
    residual: float
    degenerate: bool = False


def golden_refine(fn, left: float, middle: float, right: float) -> Optional[Tuple[float, float]]:
    """
    Golden-section search inside the bracket left < middle < right.

        :return: (x, fn(x)), or None unless fn(middle) lies strictly below both ends.
    """
    if not left < middle < right:
        return None
    f_middle = fn(middle)
    if not (f_middle < fn(left) and f_middle < fn(right)):
        return None
    result = minimize_scalar(
        fn,
        bracket=(left, middle, right),
        method="golden",
        options={"xtol": GOLDEN_XTOL, "maxiter": GOLDEN_MAXITER},
    )
    return float(result.x), float(result.fun)


def _norm_at(K: Subtree, u: StepWeight, v: StepWeight, p: PNorm, grid: int, root: Location, seed: int) -> float:
    if not p.is_finite:
        return sup_norm(K, u, v, root)
    return op_norm(DiscretizedOperator(K, u, v, p, grid, root=root), seed=seed).value


def min_over_roots(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    grid: int = DEFAULT_GRID,
    samples: int = ROOT_SAMPLES,
    seed: int = 0,
) -> Tuple[float, Location]:
    """
    min over b in K of ||T_b||, by a coarse scan followed by a golden-section refinement.

        :return: (value, minimizing root) with ties going to the smallest (edge id, offset).
    """
    p = PNorm.parse(p)
    tree = K.host.tree
    cache: Dict[Location, float] = {}

    def evaluate(edge_id: str, offset: float) -> float:
        location = tree.location(edge_id, offset)
        if location not in cache:
            cache[location] = _norm_at(K, u, v, p, grid, location, seed)
        return cache[location]

    scanned = []
    for segment in K.segments:
        for k in range(samples + 2):
            offset = segment.lo + (segment.hi - segment.lo) * k / (samples + 1)
            scanned.append((evaluate(segment.edge, offset), segment.edge, offset))
    low = min(value for value, _, _ in scanned)
    best_value, best_edge, best_offset = min(
        (item for item in scanned if item[0] <= low * (1 + TIE_TOL)), key=lambda item: (item[1], item[2])
    )

    segment = next(s for s in K.segments if s.edge == best_edge and s.lo <= best_offset <= s.hi)
    step = (segment.hi - segment.lo) / (samples + 1)
    lo, hi = max(segment.lo, best_offset - step), min(segment.hi, best_offset + step)
    refined = golden_refine(lambda t: evaluate(best_edge, t), lo, best_offset, hi)
    if refined is not None and refined[1] < best_value * (1 - TIE_TOL):
        best_offset, best_value = refined
    LOGGER.debug(
        "min over {} roots: {:.12g} at ({}, {:.9g})".format(len(cache), best_value, best_edge, best_offset)
    )
    return best_value, tree.location(best_edge, best_offset)


def point_mass_value(K: Subtree, u: StepWeight, v: StepWeight) -> float:
    """
    A(K) for p = 1 from point masses: the sup over t of u(t) * min(m, mu(K) - m), where m is the
    v-mass succeeding t clipped to mu(K) / 2 along each u-piece.
    """
    masses = [v.profiles[s.edge].integral(1.0, s.lo, s.hi) for s in K.segments]
    below = list(masses)
    for index in range(len(K.segments) - 1, -1, -1):
        parent = K.segments[index].parent
        if parent is not None:
            below[parent] += below[index]
    total = math.fsum(below[i] for i in K.child_segments(None))
    half = 0.5 * total
    best = 0.0
    for index, segment in enumerate(K.segments):
        v_profile = v.profiles[segment.edge]
        rest = below[index] - masses[index]
        for start, end, value in u.profiles[segment.edge].pieces(segment.lo, segment.hi):
            high = v_profile.integral(1.0, start, segment.hi) + rest
            low = v_profile.integral(1.0, end, segment.hi) + rest
            m = min(max(half, low), high)
            best = max(best, value * min(m, total - m))
    return best


def A_value(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    grid: int = DEFAULT_GRID,
    root: Optional[Location] = None,
    method: str = "auto",
    seed: int = 0,
) -> AValue:
    """
    A(K) = sup over ||f||_p <= 1 of inf over c of ||T_K f - c v||_p.

        :param K: The subtree.
        :param u: Inner weight on K's host tree.
        :param v: Outer weight on K's host tree.
        :param p: Exponent in [1, inf].
        :param grid: Cells per segment for the grid-based methods.
        :param root: Operator root for the p = 2 projection, defaults to the anchor.
        :param method: "auto", "projection" (p = 2 only), "roots" or "point-mass" (p = 1 only).
        :return: AValue.
    """
    p = PNorm.parse(p)
    if K.is_point() or mu(K, v, p) == 0:
        return AValue(0.0, K.anchor if root is None else root, "zero-measure")
    if method == "auto":
        method = "projection" if p.p == 2 else "point-mass" if p.p == 1 else "roots"

    if method == "point-mass":
        if p.p != 1:
            raise UnsupportedExponentError("The point-mass formula applies to p = 1 only")
        return AValue(point_mass_value(K, u, v), K.anchor, "point-mass", certified=False)
    if method == "projection":
        if p.p != 2:
            raise UnsupportedExponentError("The projection formula applies to p = 2 only")
        T = DiscretizedOperator(K, u, v, p, grid, root=root)
        B = T.weighted_matrix
        profile = np.sqrt(T.q) * T.v
        scale = float(profile @ profile)
        if scale == 0:
            return AValue(0.0, T.root, "zero-measure")
        projected = B - np.outer(profile, profile @ B) / scale
        return AValue(top_singular_value(projected), T.root, "projection")
    if method == "roots":
        if p.p == 1:
            raise UnsupportedExponentError("Minimizing over roots is not available for p = 1")
        value, best = min_over_roots(K, u, v, p, grid, seed=seed)
        return AValue(value, best, "roots")
    raise DomainError("Unknown A(K) method: {}".format(method))


def argmin_shift(T: DiscretizedOperator, f) -> Shift:
    """
    The constant c minimizing ||T f - c v||_p over the grid of T.

        :raises UnsupportedExponentError: for p = 1, where the minimizer need not be unique.
    """
    p = T.p
    if p.p == 1:
        raise UnsupportedExponentError("The optimal shift is not unique for p = 1")
    g = apply(T, f)
    if not np.any(T.v * T.q > 0):
        return Shift(0.0, T.norm_of(g), degenerate=True)
    if p.p == 2:
        c = float(np.sum(T.q * g * T.v) / np.sum(T.q * T.v ** 2))
        return Shift(c, T.norm_of(g - c * T.v))

    support = T.v > 0
    ratios = g[support] / T.v[support]
    lo, hi = float(np.min(ratios)), float(np.max(ratios))
    if hi - lo <= 1e-15 * max(1.0, abs(hi)):
        return Shift(lo, T.norm_of(g - lo * T.v))
    # The residual is convex in c and increases outside [lo, hi], so one sample past each end
    # keeps the scanned minimum interior.
    def residual(c):
        return T.norm_of(g - c * T.v)

    step = (hi - lo) / SHIFT_SAMPLES
    samples = [lo + step * k for k in range(-1, SHIFT_SAMPLES + 2)]
    values = [residual(c) for c in samples]
    k = int(np.argmin(values))
    best = (samples[k], values[k])
    if 0 < k < len(samples) - 1:
        refined = golden_refine(residual, samples[k - 1], samples[k], samples[k + 1])
        if refined is not None and refined[1] < best[1]:
            best = refined
    return Shift(float(best[0]), float(best[1]))
