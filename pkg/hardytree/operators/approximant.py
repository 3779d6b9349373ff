"""Rank-#parts approximants built from a partition."""
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from hardytree.exceptions import PartitionError, UnsupportedExponentError
from hardytree.geometry.subtree import Partition, validate_partition
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID, DiscretizedOperator
from hardytree.operators.norms import NormEstimate, matrix_norm
from hardytree.operators.quotient import A_value
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")


@dataclass
class FiniteRankApproximant:
    """
    P = sum over parts of (v chi_part) (x) l_part on the grid of `operator`.

    The grid of `operator` has every part boundary as a cell boundary, so T - P splits into
    one block per part.
    """

    operator: DiscretizedOperator
    matrix: np.ndarray
    partition: Partition
    masks: List[np.ndarray]

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix)) if np.any(self.matrix) else 0

    def apply(self, f) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=float)

    def error_norm(self, seed: int = 0) -> NormEstimate:
        """||T - P|| on the shared grid."""
        return matrix_norm(self.operator, self.operator.matrix - self.matrix, positive=False, seed=seed)


def _part_breaks(partition: Partition) -> Dict[str, List[float]]:
    breaks: Dict[str, List[float]] = {}
    for part in partition.parts:
        for segment in part.segments:
            breaks.setdefault(segment.edge, []).extend((segment.lo, segment.hi))
    return breaks


def finite_rank_approximant(
    partition: Partition, u: StepWeight, v: StepWeight, p, grid: int = DEFAULT_GRID, seed: int = 0
) -> FiniteRankApproximant:
    """
    The approximant whose error on each part equals A of that part.

    For p = 2 the functional of a part is the root-path integral to its anchor plus the
    v^2-weighted average of the part's own operator; otherwise it is the integral along the
    path to the part's minimizing root.

        :param partition: A valid partition of the operator's subtree.
        :raises PartitionError: if the partition is invalid.
        :raises UnsupportedExponentError: for p = 1.
    """
    p = PNorm.parse(p)
    if p.p == 1:
        raise UnsupportedExponentError("No approximant construction for p = 1")
    report = validate_partition(partition)
    if not report.valid:
        raise PartitionError(report.describe(), report)

    T = DiscretizedOperator(partition.parent, u, v, p, grid, breaks=_part_breaks(partition))
    weights = T.u * T.q
    masks = [T.nodes_in(part) for part in partition.parts]
    rows: List[np.ndarray] = []
    for part, mask in zip(partition.parts, masks):
        if p.p == 2:
            row = T.path_row(part.anchor) * weights
            mass = float(np.sum(T.q[mask] * T.v[mask] ** 2))
            if mass > 0:
                local = (T.q[mask] * T.v[mask] ** 2) @ T.coverage[np.ix_(mask, mask)]
                row[mask] += local * weights[mask] / mass
        else:
            anchor = A_value(part, u, v, p, grid, seed=seed).root
            row = T.path_row(anchor) * weights
        rows.append(row)

    outer = np.column_stack([np.where(mask, T.v, 0.0) for mask in masks])
    matrix = outer @ np.vstack(rows)
    LOGGER.debug("Approximant of rank <= {} on {} nodes".format(len(rows), T.size))
    return FiniteRankApproximant(T, matrix, partition, masks)


def part_errors(approximant: FiniteRankApproximant, seed: int = 0) -> List[Tuple[int, float]]:
    """||(T - P) restricted to each part||, part by part."""
    T = approximant.operator
    errors = []
    difference = T.matrix - approximant.matrix
    for index, mask in enumerate(approximant.masks):
        block = np.where(np.outer(mask, mask), difference, 0.0)
        errors.append((index, matrix_norm(T, block, positive=False, seed=seed).value))
    return errors
