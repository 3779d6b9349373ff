"""Inequality checks: the boundedness criterion, the sigma-sequence bounds and the p = 1, inf interval estimates."""
import math
import sys
import traceback
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from hardytree.asymptotics.sigma import LevelGeometry, SequenceNorms, SigmaTable
from hardytree.checks import CheckReport
from hardytree.exceptions import DomainError, InfeasibleError, UnsupportedExponentError
from hardytree.geometry.subtree import Cut, Subtree
from hardytree.geometry.tree import SNAP, Location
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID, DiscretizedOperator
from hardytree.operators.norms import SingularSpectrum, op_norm
from hardytree.operators.quotient import A_value
from hardytree.weights import (
    PNorm,
    StepProfile,
    StepWeight,
    descendant_mass,
    integral_product,
    interval_profile,
    lp_norm,
    sup_rearranged_product,
)

LOGGER = Logger.get_logger("hardytree")

LOWER_BOUND_SAMPLES = 64
FAMILY_OFFSETS = 16
LEVEL_FRACTIONS = 8
GRID_SLACK = 5e-3
GAP_ALPHAS = (1.5, 2.0, 4.0, 8.0, 16.0)
FEASIBILITY_TOL = 1e-8


def _path_sups(G: Subtree, w: StepWeight) -> List[float]:
    """sup of w on the path from the anchor down to the start of each segment."""
    sups: List[float] = []
    for segment in G.segments:
        if segment.parent is None:
            sups.append(0.0)
            continue
        parent = G.segments[segment.parent]
        sups.append(max(sups[segment.parent], w.profiles[parent.edge].sup(parent.lo, parent.hi)))
    return sups


def _below_sups(G: Subtree, w: StepWeight) -> List[float]:
    """sup of w over everything hanging below the end of each segment."""
    below = [0.0] * len(G.segments)
    for index in range(len(G.segments) - 1, -1, -1):
        for child in G.child_segments(index):
            segment = G.segments[child]
            below[index] = max(below[index], below[child], w.profiles[segment.edge].sup(segment.lo, segment.hi))
    return below


def _sample_offsets(G: Subtree, index: int, u: StepWeight, v: StepWeight) -> np.ndarray:
    segment = G.segments[index]
    points = list(np.linspace(segment.lo, segment.hi, LOWER_BOUND_SAMPLES + 1))
    for w in (u, v):
        points += [float(b) for b in w.profiles[segment.edge].breaks if segment.lo < b < segment.hi]
    return np.unique(points)


def norm_lower_bound(G: Subtree, u: StepWeight, v: StepWeight, p) -> float:
    """
    sup over x of ||u chi_(a,x)||_{p'} * ||v chi_{y >= x}||_p, each factor exact for step weights.

    x runs over a uniform grid on every segment together with the step breakpoints of u and v.
    """
    p = PNorm.parse(p)
    tree = G.host.tree
    first_sup = math.isinf(p.conjugate)
    geometry = None if first_sup else LevelGeometry(G, u, None, p)
    path_sups = _path_sups(G, u) if first_sup else None
    below_sups = None if p.is_finite else _below_sups(G, v)

    best = 0.0
    for index, segment in enumerate(G.segments):
        u_profile, v_profile = u.profiles[segment.edge], v.profiles[segment.edge]
        for offset in _sample_offsets(G, index, u, v):
            if first_sup:
                left = max(path_sups[index], u_profile.sup(segment.lo, offset))
            else:
                left = geometry.at(index, offset) ** (1.0 / p.conjugate)
            if left <= 0:
                continue
            if p.is_finite:
                right = descendant_mass(G, v, p.p, tree.location(segment.edge, offset)) ** (1.0 / p.p)
            else:
                right = max(below_sups[index], v_profile.sup(offset, segment.hi))
            best = max(best, left * right)
    LOGGER.debug("Two-factor lower bound {:.10g}".format(best))
    return best


def _path_pieces(K: Subtree) -> Tuple[List[Tuple[str, float, float]], np.ndarray]:
    """
    The edge pieces of the paths from the root to every cut point of K, and the
    path-by-piece incidence matrix.
    """
    host = K.host
    paths = [host.root_path(point) for point in K.cut_points()]
    stops: Dict[str, set] = {}
    for steps in paths:
        for step in steps:
            stops.setdefault(step.edge, {0.0}).add(step.end)
    pieces = []
    for edge_id in host.edge_order:
        if edge_id not in stops:
            continue
        offsets = sorted(stops[edge_id])
        pieces += [(edge_id, a, b) for a, b in zip(offsets, offsets[1:]) if b - a > SNAP]
    incidence = np.zeros((len(paths), len(pieces)))
    for i, steps in enumerate(paths):
        reach = {step.edge: step.end for step in steps}
        for j, (edge_id, _, hi) in enumerate(pieces):
            if edge_id in reach and hi <= reach[edge_id] + SNAP:
                incidence[i, j] = 1.0
    return pieces, incidence


def _piece_weight(profile: StepProfile, lo: float, hi: float, p: PNorm) -> float:
    """||u chi_s||_{p'} on one piece."""
    if math.isinf(p.conjugate):
        return profile.sup(lo, hi)
    return profile.integral(p.conjugate, lo, hi) ** (1.0 / p.conjugate)


def alpha_K(K: Subtree, u: StepWeight, p) -> float:
    """
    alpha_K = inf{||f||_p : int_a^t |f||u| = 1 for every boundary point t of K}.

    On each edge piece s of the root-to-boundary paths the cheapest f carrying mass m_s costs
    m_s / ||u chi_s||_{p'}, so the problem reduces to one variable per piece with one equality per
    boundary point. A single boundary point has the closed form 1 / ||u||_{p', path}.

        :raises DomainError: unless K contains the root of its host and has a maximal boundary.
        :raises InfeasibleError: when u vanishes along some root-to-boundary path.
    """
    p = PNorm.parse(p)
    if not K.contains_root() or not K.is_maximal():
        raise DomainError("alpha_K needs a subtree containing the root with a maximal boundary")
    pieces, incidence = _path_pieces(K)
    if not incidence.shape[0]:
        return 0.0
    weights = np.array([_piece_weight(u.profiles[e], lo, hi, p) for e, lo, hi in pieces])
    usable = weights > 0
    if np.any(incidence[:, usable].sum(axis=1) == 0):
        raise InfeasibleError("u vanishes on a path from the root to a boundary point of K")
    A, w = incidence[:, usable], weights[usable]
    rows = A.shape[0]

    if rows == 1:
        if not p.is_finite:
            return 1.0 / float(np.sum(w))
        if p.p == 1:
            return 1.0 / float(np.max(w))
        return float(np.sum(w ** p.conjugate)) ** (-1.0 / p.conjugate)

    ones = np.ones(rows)
    if p.p == 1:
        result = linprog(1.0 / w, A_eq=A, b_eq=ones, bounds=[(0, None)] * w.size, method="highs")
        if not result.success:
            raise InfeasibleError("alpha_K linear program failed: {}".format(result.message))
        return float(result.fun)
    if not p.is_finite:
        # variables (m, z): minimise z with m_s <= w_s z
        cost = np.zeros(w.size + 1)
        cost[-1] = 1.0
        bound_rows = np.hstack([np.eye(w.size), -w[:, None]])
        result = linprog(
            cost,
            A_ub=bound_rows,
            b_ub=np.zeros(w.size),
            A_eq=np.hstack([A, np.zeros((rows, 1))]),
            b_eq=ones,
            bounds=[(0, None)] * (w.size + 1),
            method="highs",
        )
        if not result.success:
            raise InfeasibleError("alpha_K linear program failed: {}".format(result.message))
        return float(result.fun)

    exponent = p.p
    start = np.linalg.lstsq(A, ones, rcond=None)[0].clip(min=1e-3)
    result = minimize(
        lambda m: float(np.sum((m / w) ** exponent)),
        start,
        jac=lambda m: exponent * (m / w) ** (exponent - 1) / w,
        constraints=[{"type": "eq", "fun": lambda m: A @ m - ones, "jac": lambda m: A}],
        bounds=[(0, None)] * w.size,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    residual = float(np.max(np.abs(A @ result.x - ones)))
    if not result.success or residual > FEASIBILITY_TOL:
        LOGGER.warning("alpha_K program ended with residual {:.2e}: {}".format(residual, result.message))
    return float(result.fun) ** (1.0 / exponent)


def _complement_norm(G: Subtree, K: Subtree, v: StepWeight, p: PNorm) -> float:
    """||v chi_{G minus K}||_p from the edge intervals of G not covered by K."""
    inside = {segment.edge: (segment.lo, segment.hi) for segment in K.segments}
    pieces = []
    for segment in G.segments:
        lo, hi = inside.get(segment.edge, (segment.hi, segment.hi))
        for a, b in ((segment.lo, min(lo, segment.hi)), (max(hi, segment.lo), segment.hi)):
            if b - a > SNAP:
                pieces += v.profiles[segment.edge].pieces(a, b)
    if not pieces:
        return 0.0
    if not p.is_finite:
        return max(value for _, _, value in pieces)
    return math.fsum((b - a) * value ** p.p for a, b, value in pieces if value > 0) ** (1.0 / p.p)


def candidate_family(G: Subtree, u: StepWeight, p) -> List[Subtree]:
    """
    Subtrees containing the root with maximal boundary: one cut at a fixed set of offsets per
    segment, and the sublevel sets {U <= t} for dyadic and uniformly spaced levels t.
    """
    p = PNorm.parse(p)
    host = G.host
    tree = host.tree
    root = host.root_location
    family: Dict[object, Subtree] = {}

    def add(cuts: Iterable[Location]):
        cuts = frozenset(Cut(location) for location in cuts if location != root)
        if not cuts:
            return
        K = Subtree(host, root, cuts)
        family.setdefault(K.key, K)

    for segment in G.segments:
        for k in range(1, FAMILY_OFFSETS):
            add([tree.location(segment.edge, segment.lo + (segment.hi - segment.lo) * k / FAMILY_OFFSETS)])
        add([tree.location(segment.edge, segment.hi)])

    if not math.isinf(p.conjugate):
        geometry = LevelGeometry(G, u, None, p)
        levels = [geometry.top * j / LEVEL_FRACTIONS for j in range(1, LEVEL_FRACTIONS)]
        if p.is_finite and geometry.top > 0:
            ratio = p.conjugate / p.p
            k = math.floor(math.log2(geometry.top) / ratio)
            while 2.0 ** (k * ratio) > geometry.top * 1e-6:
                levels.append(2.0 ** (k * ratio))
                k -= 1
        for level in sorted(set(levels)):
            cuts = []
            for index, segment in enumerate(G.segments):
                _, values = geometry.tables[index]
                if values[0] < level <= values[-1]:
                    cuts.append(tree.location(segment.edge, geometry.reach(index, level)))
            add(cuts)
    LOGGER.debug("Candidate family of {} subtrees".format(len(family)))
    return list(family.values())


def boundedness_check(
    G: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    family: Optional[Sequence[Subtree]] = None,
    grid: int = DEFAULT_GRID,
    seed: int = 0,
    slack: float = GRID_SLACK,
) -> CheckReport:
    """
    A_hat = max over the family of ||v chi_{G minus K}||_p / alpha_K against ||T_a||.

    A_hat <= ||T|| is asserted; ||T|| <= 4 A_hat is reported, since a finite family only bounds
    the supremum from below.

        :param family: Subtrees containing the root with maximal boundary, by default candidate_family.
        :raises DomainError: for an empty family.
    """
    p = PNorm.parse(p)
    family = candidate_family(G, u, p) if family is None else list(family)
    if not family:
        raise DomainError("boundedness_check needs at least one candidate subtree")
    best, skipped = 0.0, 0
    for K in family:
        try:
            alpha = alpha_K(K, u, p)
        except InfeasibleError:
            skipped += 1
            continue
        if alpha <= 0:
            skipped += 1
            continue
        best = max(best, _complement_norm(G, K, v, p) / alpha)
    norm = op_norm(DiscretizedOperator(G, u, v, p, grid), seed=seed).value
    LOGGER.info(
        "Boundedness: A_hat={:.8g} over {} subtrees ({} skipped), ||T||={:.8g}".format(
            best, len(family) - skipped, skipped, norm
        )
    )
    report = CheckReport("boundedness p={}".format(p))
    report.add("A_hat <= ||T||", best, norm * (1 + slack))
    report.add("||T|| <= 4 A_hat", norm, 4 * best, asserted=False, note="finite family")
    return report


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 0.0 if numerator == 0 else math.inf
    return numerator / denominator


def lq_bound_checks(
    spectrum: SingularSpectrum,
    table: SigmaTable,
    q: float,
    packings: Sequence = (),
    u: Optional[StepWeight] = None,
    v: Optional[StepWeight] = None,
    grid: int = DEFAULT_GRID,
    seed: int = 0,
    slack: float = GRID_SLACK,
) -> CheckReport:
    """
    Sequence-space bounds between the approximation numbers and the sigma quantities.

    Asserted: sup sigma_{k,i} <= a_1 = ||T||, weak-l^q <= l^q for every sequence, and for each
    packing the explicit-constant bound on sum_l ||T_{G_l}||^q. Bounds whose constant is not
    explicit are reported as ratios, asserted finite only.

        :param packings: EpsPackingResult values; their parts need `u` and `v`.
        :raises UnsupportedExponentError: unless the table was built for p = 2.
        :raises DomainError: for q < 1, or packings without weights.
    """
    p = table.p
    if p.p != 2:
        raise UnsupportedExponentError("Approximation numbers are available for p = 2 only")
    if not q >= 1:
        raise DomainError("q must be at least 1, got {}".format(q))
    if packings and (u is None or v is None):
        raise DomainError("Packing checks need the weights u and v")
    report = CheckReport("lq q={:g}".format(q))
    a = SequenceNorms.of(spectrum.values)
    sigma_ki = SequenceNorms.of(table.sigma_ki())
    sigma_k = SequenceNorms.of(table.sigma_k())
    weighted = SequenceNorms.of(table.weighted_ki())

    norm = spectrum.a(1) if len(spectrum) else 0.0
    report.add("sup sigma_ki <= ||T||", max(sigma_ki.values, default=0.0), norm * (1 + slack))
    for name, sequence in (("a_n", a), ("sigma_ki", sigma_ki), ("sigma_k", sigma_k), ("B^(1/p') sigma", weighted)):
        strong = sequence.lq(q)
        report.add("weak-l^q <= l^q ({})".format(name), sequence.weak(q), strong * (1 + 1e-12))

    constant = 2.0 ** (2.0 / p.p + 2.0)
    if q <= p.p:
        rhs = constant ** q * math.fsum(x ** q for x in weighted.values)
        rows = [("||a||_q / ||B^(1/p') sigma||_q", a.lq(q), weighted.lq(q)),
                ("weak ||a||_q / ||B^(1/p') sigma||_q", a.weak(q), weighted.weak(q))]
    else:
        rhs = constant ** q * math.fsum(x ** q for x in sigma_k.values)
        rows = [("||a||_q / ||sigma_k||_q", a.lq(q), sigma_k.lq(q)),
                ("weak ||a||_q / ||sigma_k||_q", a.weak(q), sigma_k.weak(q))]
    rows.append(("||sigma_ki||_q / ||a||_q", sigma_ki.lq(q), a.lq(q)))
    for name, numerator, denominator in rows:
        ratio = _ratio(numerator, denominator)
        report.add(name, ratio, sys.float_info.max, note="ratio, constant not explicit")

    for packing in packings:
        lhs = math.fsum(
            op_norm(DiscretizedOperator(part, u, v, p, grid), seed=seed).value ** q for part in packing.parts
        )
        report.add("sum ||T_l||^q <= C^q sum (eps={:.6g})".format(packing.eps), lhs, rhs * (1 + slack))
        report.add(
            "eps^q M <= sum ||T_l||^q (eps={:.6g})".format(packing.eps), packing.eps ** q * packing.count, lhs,
            asserted=False,
        )
    for check in report.failures:
        LOGGER.warning("Sequence bound failed: {} ({} vs {})".format(check.name, check.value, check.bound))
    return report


def _constant_value(profile: StepProfile, name: str) -> float:
    values = profile.values
    if np.ptp(values) > 1e-12 * max(1.0, float(np.max(values))):
        raise DomainError("{} must be constant on the interval".format(name))
    return float(values[0])


def p1_inf_bounds(
    I: Subtree,
    u: StepWeight,
    v: StepWeight,
    which: str,
    alphas: Sequence[float] = GAP_ALPHAS,
    dominated: Optional[StepWeight] = None,
    grid: int = DEFAULT_GRID,
    seed: int = 0,
) -> CheckReport:
    """
    Interval estimates for p = inf (u constant gamma, which="pinf") and p = 1 (v constant gamma,
    which="p1"), with delta the sup of the other weight.

    Checks A(delta) >= A(w_s), the rearrangement lower bound on A(w_s) and the gap bound for every
    alpha; for p = 1 also the monotonicity in u against `dominated` (default u / 2). The integral
    of the two weights is reported as the target of n a_n, which lies between 1/6 and 3 times it.

        :raises DomainError: if I is not an interval or the constant weight is not constant.
    """
    if which not in ("p1", "pinf"):
        raise DomainError("which must be 'p1' or 'pinf', got {!r}".format(which))
    if I.is_point() or not I.is_interval():
        raise DomainError("The p = 1 and p = inf estimates are stated on intervals")
    length = I.length()
    u_profile, v_profile = interval_profile(u, I), interval_profile(v, I)
    if which == "pinf":
        p, gamma, varying, label = PNorm.parse("inf"), _constant_value(u_profile, "u"), v_profile, "v_s"
        factor = 0.5
    else:
        p, gamma, varying, label = PNorm.parse(1), _constant_value(v_profile, "v"), u_profile, "u_s"
        factor = 0.25
    delta = lp_norm(v if which == "pinf" else u, "inf", I)
    scale = gamma * delta * length
    tolerance = 1e-5 * scale

    try:
        A_delta = 0.5 * scale
        A_s = A_value(I, u, v, p, grid, seed=seed).value
    except Exception as e:
        LOGGER.error("Interval estimate failed: {}\nTraceback: {}".format(e, traceback.format_exc()))
        raise
    lower = factor * gamma * sup_rearranged_product(varying)
    report = CheckReport("interval {}".format(which))
    report.add("A(I; {0}) <= A(I; delta)".format(label), A_s, A_delta + tolerance)
    report.add("A(I; {}) >= {:g} gamma ||g* t||".format(label, factor), A_s, lower - tolerance, direction=">=")
    deficit = math.fsum((b - a) * (delta - value) for a, b, value in varying.pieces())
    for alpha in alphas:
        bound = 0.5 * alpha * gamma * deficit + scale / (2.0 * alpha)
        report.add("gap <= alpha/2 int gamma(delta - {}) + gamma delta |I|/(2 alpha), alpha={:g}".format(label, alpha),
                   A_delta - A_s, bound + tolerance)
    if which == "p1":
        smaller = dominated if dominated is not None else u.scaled(0.5)
        A_small = A_value(I, smaller, v, p, grid, seed=seed).value
        report.add("A(I; u) >= A(I; u_2) for u >= u_2", A_s, A_small - tolerance, direction=">=")

    target = integral_product(u, v, I)
    report.add("1/6 target <= 3 target", target / 6.0, 3.0 * target, asserted=False,
               note="int |u||{}| = {:.10g}; n a_n lies between these in the limit".format(label, target))
    LOGGER.info("Interval estimates ({}): A(delta)={:.8g}, A(s)={:.8g}".format(which, A_delta, A_s))
    return report
