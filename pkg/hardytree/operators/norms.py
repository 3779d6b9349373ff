"""Operator norms, singular spectra and grid refinement."""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import Location
from hardytree.log.logging import Logger
from hardytree.operators.base import DiscretizedOperator, top_right_singular_vector, top_singular_value
from hardytree.weights import PNorm, descendant_mass

LOGGER = Logger.get_logger("hardytree")

ASCENT_STARTS = 12
ASCENT_TOL = 1e-8
ASCENT_WINDOW = 50
ASCENT_MAX_ITERATIONS = 3000


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    iterations: int
    method: str


@dataclass(frozen=True)
class SingularSpectrum:
    """Approximation numbers a_1 >= a_2 >= ... of a p = 2 operator on one grid."""

    values: Tuple[float, ...]
    grid: int
    nodes: int

    def a(self, n: int) -> float:
        """The n-th approximation number, 1-based; zero beyond the grid's rank."""
        if n < 1:
            raise DomainError("Approximation numbers are indexed from 1")
        if n > self.nodes:
            return 0.0
        if n > len(self.values):
            raise IndexError("Only {} approximation numbers were computed".format(len(self.values)))
        return self.values[n - 1]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class RefinementResult:
    grids: Tuple[int, ...]
    values: Tuple[float, ...]
    estimate: float
    error: float


def _duality(x: np.ndarray, exponent: float) -> np.ndarray:
    """|x|^(exponent-1) sgn(x), scaled so the largest entry has modulus one."""
    scale = np.max(np.abs(x))
    if scale == 0:
        return np.zeros_like(x)
    y = x / scale
    return np.sign(y) * np.abs(y) ** (exponent - 1.0)


def ascent(
    matrix: np.ndarray,
    q: np.ndarray,
    p: PNorm,
    starts: Sequence[np.ndarray],
    tol: float = ASCENT_TOL,
    window: int = ASCENT_WINDOW,
    max_iterations: int = ASCENT_MAX_ITERATIONS,
) -> NormEstimate:
    """
    Nonlinear power iteration for the weighted l^p -> l^p norm of `matrix`.

    Each step maps f to J_{p'}(M* J_p(M f)) where J is the duality map and M* is the adjoint
    for the pairing sum_i q_i f_i g_i; the ratio ||Mf|| / ||f|| never decreases.
    """
    pp = p.p
    dual = p.conjugate
    adjoint = matrix.T * q[None, :] / q[:, None]

    def norm(f):
        return np.sum(q * np.abs(f) ** pp) ** (1.0 / pp)

    best, total, converged = 0.0, 0, True
    for start in starts:
        f = np.asarray(start, dtype=float)
        if norm(f) == 0:
            continue
        f = f / norm(f)
        history = [norm(matrix @ f)]
        for step in range(max_iterations):
            g = matrix @ f
            y = adjoint @ _duality(g, pp)
            f_new = _duality(y, dual)
            size = norm(f_new)
            if size == 0:
                break
            f = f_new / size
            history.append(norm(matrix @ f))
            if len(history) > window:
                old = history[-window - 1]
                if history[-1] - old <= tol * max(history[-1], 1e-300):
                    break
        else:
            converged = False
        total += len(history) - 1
        best = max(best, max(history))
    return NormEstimate(float(best), converged, total, "ascent")


def _starting_vectors(T: DiscretizedOperator, matrix: np.ndarray, positive: bool, seed: int):
    rng = np.random.default_rng(seed)
    root_q = np.sqrt(T.q)
    weighted = root_q[:, None] * matrix / root_q[None, :]
    starts = []
    if np.any(weighted):
        warm = top_right_singular_vector(weighted) / root_q
        starts.append(np.abs(warm) if positive else warm)
    for _ in range(ASCENT_STARTS):
        starts.append(rng.uniform(0.0, 1.0, T.size) if positive else rng.standard_normal(T.size))
    return starts


def matrix_norm(
    T: DiscretizedOperator, matrix: np.ndarray, positive: bool = True, seed: int = 0
) -> NormEstimate:
    """Norm of a grid matrix on T's grid as a map of the weighted l^p space of T."""
    p = T.p
    if not np.any(matrix):
        return NormEstimate(0.0, True, 0, "zero")
    if p.p == 2:
        root_q = np.sqrt(T.q)
        value = top_singular_value(root_q[:, None] * matrix / root_q[None, :])
        return NormEstimate(value, True, 0, "svd")
    if not p.is_finite:
        return NormEstimate(float(np.max(np.sum(np.abs(matrix), axis=1))), True, 0, "row-sum")
    if p.p == 1:
        column = np.sum(np.abs(matrix) * T.q[:, None], axis=0) / T.q
        return NormEstimate(float(np.max(column)), True, 0, "column-sum")
    estimate = ascent(matrix, T.q, p, _starting_vectors(T, matrix, positive, seed))
    if not estimate.converged:
        LOGGER.warning("Norm ascent stopped at the iteration cap; value {:.10g}".format(estimate.value))
    return estimate


def sup_norm(K: Subtree, u, v, root: Optional[Location] = None) -> float:
    """
    Exact norm for p = inf: the sup over K of v(x) * int_b^x u, from the step data.
    """
    rooted = K.as_rooted(root)
    u_local, v_local = u.on_local(K, rooted), v.on_local(K, rooted)
    reach = {rooted.root: 0.0}
    best = 0.0
    for edge_id in rooted.edge_order:
        edge = rooted.tree.edges[edge_id]
        base = reach[edge.source]
        u_profile = u_local.profiles[edge_id]
        for _, end, value in v_local.profiles[edge_id].pieces():
            best = max(best, value * (base + u_profile.integral(1.0, 0.0, end)))
        reach[edge.target] = base + u_profile.integral(1.0)
    return best


def one_norm(K: Subtree, u, v, root: Optional[Location] = None) -> float:
    """
    Exact norm for p = 1: the sup over points t of u(t) times the v-mass succeeding t.
    """
    rooted = K.as_rooted(root)
    u_local, v_local = u.on_local(K, rooted), v.on_local(K, rooted)
    whole = Subtree.whole(rooted)
    best = 0.0
    for edge_id in rooted.edge_order:
        edge = rooted.tree.edges[edge_id]
        v_profile = v_local.profiles[edge_id]
        below = descendant_mass(whole, v_local, 1.0, rooted.tree.vertex_location(edge.target))
        for start, _, value in u_local.profiles[edge_id].pieces():
            best = max(best, value * (v_profile.integral(1.0, start) + below))
    return best


def op_norm(T: DiscretizedOperator, seed: int = 0) -> NormEstimate:
    """
    ||T_b||_{p -> p} on K.

    p = 2 uses the top singular value of the grid matrix, p = 1 and p = inf use the exact
    closed forms, other p use a multi-start nonlinear power ascent.
    """
    p = T.p
    if not p.is_finite:
        return NormEstimate(sup_norm(T.K, T.u_weight, T.v_weight, T.root), True, 0, "closed-form")
    if p.p == 1:
        return NormEstimate(one_norm(T.K, T.u_weight, T.v_weight, T.root), True, 0, "closed-form")
    return matrix_norm(T, T.matrix, positive=True, seed=seed)


def approx_numbers_p2(T: DiscretizedOperator, count: Optional[int] = None) -> SingularSpectrum:
    """
    The first `count` approximation numbers of T for p = 2, i.e. its singular values.

        :raises UnsupportedExponentError: when T was not built for p = 2.
    """
    if T.p.p != 2:
        raise UnsupportedExponentError("Singular values give approximation numbers only for p = 2")
    values = scipy.linalg.svdvals(T.weighted_matrix, check_finite=False)
    if count is not None:
        values = values[:count]
    return SingularSpectrum(tuple(float(x) for x in values), T.n, T.size)


def grid_refinement(fn: Callable[[int], float], grids: Sequence[int] = (256, 512, 1024, 2048)) -> RefinementResult:
    """
    Evaluates fn on successively finer grids and extrapolates with the observed order.

        :param fn: Maps a grid size to a computed quantity.
        :param grids: Increasing grid sizes, each typically double the previous.
        :return: RefinementResult with the extrapolated value and its error estimate.
    """
    grids = tuple(int(n) for n in grids)
    if not grids:
        raise DomainError("Grid refinement needs at least one grid")
    values = tuple(float(fn(n)) for n in grids)
    for n, value in zip(grids, values):
        LOGGER.debug("Grid {}: {:.12g}".format(n, value))
    if len(values) == 1:
        return RefinementResult(grids, values, values[0], math.inf)
    if len(values) == 2:
        return RefinementResult(grids, values, values[-1], abs(values[-1] - values[-2]))
    d1, d2 = values[-2] - values[-3], values[-1] - values[-2]
    ratio = grids[-1] / grids[-2]
    if d1 == 0 or d2 == 0 or d1 * d2 < 0 or abs(d2) >= abs(d1):
        return RefinementResult(grids, values, values[-1], abs(d2))
    order = math.log(abs(d1 / d2)) / math.log(ratio)
    correction = d2 / (ratio ** order - 1.0)
    return RefinementResult(grids, values, values[-1] + correction, abs(correction))
