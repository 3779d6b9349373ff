"""eps-schedules: the sandwich check, the asymptotic scan of eps*N and the n*a_n table."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from hardytree.asymptotics.constants import alpha_p
from hardytree.checks import CheckReport
from hardytree.exceptions import DomainError, UnsupportedExponentError
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import SNAP
from hardytree.log.logging import Logger
from hardytree.operators.base import DEFAULT_GRID, DiscretizedOperator
from hardytree.operators.norms import SingularSpectrum, approx_numbers_p2
from hardytree.partition.covering import EpsPartitionResult, compute_N
from hardytree.partition.packing import EpsPackingResult, compute_M
from hardytree.partition.regions import RegionEvaluator
from hardytree.weights import PNorm, StepWeight, integral_product

LOGGER = Logger.get_logger("hardytree")

# Rows whose smallest part is shorter than this many bisection tolerances are flagged.
RESOLUTION_FACTOR = 1e3
GRID_SLACK = 5e-3
# Cells per piece between packing part boundaries when resolving a_M.
SANDWICH_CELLS = 16
# Largest dense kernel the sandwich spectrum is built on.
SANDWICH_MAX_NODES = 6000


def eps_schedule(start: float, factor: float, count: int) -> Tuple[float, ...]:
    """Geometric schedule start, start*factor, ...; strictly decreasing."""
    if not start > 0 or not 0 < factor < 1 or count < 1:
        raise DomainError(
            "eps schedule needs start > 0, 0 < factor < 1 and count >= 1, got {}, {}, {}".format(start, factor, count)
        )
    return tuple(start * factor ** k for k in range(count))


def gamma_p(p) -> float:
    return 1.0 if PNorm.parse(p).p == 2 else 2.0


def packing_spectrum(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    packing: EpsPackingResult,
    grid: int = DEFAULT_GRID,
    cells: int = SANDWICH_CELLS,
    max_nodes: int = SANDWICH_MAX_NODES,
) -> Tuple[SingularSpectrum, bool]:
    """
    p = 2 approximation numbers on a grid whose cell boundaries include every packing part boundary.

    Each piece between boundaries gets at least `cells` cells, and the grid is never coarser than
    `grid` cells per segment. When that needs more than `max_nodes` nodes the grid is capped and the
    spectrum is returned as unresolved, since a_M is then underestimated.

        :return: (spectrum, resolved)
    """
    breaks: Dict[str, Set[float]] = {}
    for part in packing.parts:
        for segment in part.segments:
            breaks.setdefault(segment.edge, set()).update((segment.lo, segment.hi))
    pieces = 0
    for segment in K.segments:
        inner = sorted(b for b in breaks.get(segment.edge, ()) if segment.lo + SNAP < b < segment.hi - SNAP)
        pieces += 1 + sum(1 for a, b in zip([segment.lo] + inner, inner) if b - a > SNAP)
    base = math.ceil(grid * len(K.segments) / pieces)
    resolved = cells * pieces <= max_nodes
    n = max(cells, base) if resolved else max(1, max_nodes // pieces)
    if not resolved:
        LOGGER.warning(
            "Packing at eps={:.6g} has {} pieces; a_M uses {} cells per piece instead of {}".format(
                packing.eps, pieces, n, cells
            )
        )
    T = DiscretizedOperator(K, u, v, 2, n, breaks={edge: sorted(b) for edge, b in breaks.items()})
    LOGGER.debug("Sandwich spectrum on {} nodes ({} pieces)".format(T.size, pieces))
    return approx_numbers_p2(T), resolved


def sandwich_check(
    N: EpsPartitionResult,
    M: EpsPackingResult,
    spectrum: SingularSpectrum,
    p=2,
    slack: float = GRID_SLACK,
    edges: Optional[int] = None,
    resolved: bool = True,
) -> CheckReport:
    """
    a_{N+1} <= gamma_p eps and a_M >= eps, with the counting relations between N and M.

        :param N: Covering at eps.
        :param M: Packing at the same eps.
        :param spectrum: Approximation numbers of T on the same K, see packing_spectrum.
        :param slack: Relative grid slack on both inequalities.
        :param edges: #E(K) for the M >= N - 3#E relation, reported when given.
        :param resolved: False reports a_M >= eps without asserting it.
        :raises UnsupportedExponentError: for p != 2, where no spectrum is available.
    """
    if PNorm.parse(p).p != 2:
        raise UnsupportedExponentError("The sandwich check needs p = 2 approximation numbers")
    eps = N.eps
    if M.eps != eps:
        raise DomainError("Covering and packing were computed at different eps")
    report = CheckReport("sandwich eps={:.6g}".format(eps))
    gamma = gamma_p(p)
    report.add("a_(N+1) <= gamma*eps", spectrum.a(N.count + 1), gamma * eps * (1 + slack))
    if M.count >= 1:
        report.add(
            "a_M >= eps", spectrum.a(M.count), eps * (1 - slack), direction=">=", asserted=resolved,
            note="" if resolved else "grid capped below the packing resolution",
        )
    k = N.count // 3 - 1
    if k >= 1:
        report.add("a_(floor(N/3)-1) > eps", spectrum.a(k), eps, direction=">=", asserted=False)
    if M.count >= 2:
        report.add("a_(M-1) > eps", spectrum.a(M.count - 1), eps, direction=">=", asserted=False)
    exact = N.exact_count is not None
    reference = N.exact_count if exact else N.count
    report.add(
        "M + 1 >= N/3", M.count + 1, reference / 3.0, direction=">=", asserted=exact,
        note="exact N" if exact else "greedy N",
    )
    if edges is not None:
        report.add("M >= N - 3#E", M.count, reference - 3 * edges, direction=">=", asserted=False)
    for check in report.failures:
        LOGGER.warning("Sandwich check failed: {} ({} vs {})".format(check.name, check.value, check.bound))
    return report


@dataclass(frozen=True)
class ScanRow:
    eps: float
    N: int
    N_exact: Optional[int]
    M: int
    epsN: float
    epsM: float
    target: float
    flagged: bool


@dataclass(frozen=True)
class ScanTable:
    rows: Tuple[ScanRow, ...]
    target: float
    monotone: bool
    partitions: Tuple[EpsPartitionResult, ...]
    packings: Tuple[EpsPackingResult, ...]

    @property
    def flagged(self) -> List[ScanRow]:
        return [row for row in self.rows if row.flagged]


def asymptotic_scan(
    K: Subtree,
    u: StepWeight,
    v: StepWeight,
    p,
    schedule: Sequence[float],
    grid: int = DEFAULT_GRID,
    exact: bool = False,
    workers: int = 1,
    seed: int = 0,
) -> ScanTable:
    """
    N and M along a decreasing eps schedule, next to the limit alpha_p * int uv.

    The eps values run in a worker pool when `workers` > 1; rows keep schedule order.
    """
    p = PNorm.parse(p)
    schedule = tuple(float(eps) for eps in schedule)
    if not schedule or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("eps schedule must be nonempty and strictly decreasing")
    evaluator = RegionEvaluator(K, u, v, p, grid, seed)
    target = alpha_p(p, grid).value * integral_product(u, v, K)

    def one(eps):
        return (
            compute_N(K, u, v, p, eps, grid, exact=exact, evaluator=evaluator),
            compute_M(K, u, v, p, eps, grid, evaluator=evaluator),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, schedule))
    else:
        results = [one(eps) for eps in schedule]

    rows = []
    for eps, (covering, packing) in zip(schedule, results):
        flagged = covering.min_part_length < RESOLUTION_FACTOR * covering.tolerance
        if flagged:
            LOGGER.warning("eps={:.6g} resolves parts below the bisection resolution".format(eps))
        rows.append(
            ScanRow(eps, covering.count, covering.exact_count, packing.count,
                    eps * covering.count, eps * packing.count, target, flagged)
        )
    monotone = all(b.N >= a.N and b.M >= a.M for a, b in zip(rows, rows[1:]))
    if not monotone:
        LOGGER.warning("N or M is not monotone along the eps schedule")
    return ScanTable(tuple(rows), target, monotone, tuple(r[0] for r in results), tuple(r[1] for r in results))


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    a_n: float
    n_a_n: float
    target: float
    deviation: float


@dataclass(frozen=True)
class SpectrumTable:
    rows: Tuple[SpectrumRow, ...]
    target: float
    shrinking: bool


def spectrum_scan(spectrum: SingularSpectrum, target: float, n_min: int = 1, n_max: Optional[int] = None,
                  decade: int = 10) -> SpectrumTable:
    """
    Rows (n, a_n, n*a_n, target, relative deviation) and whether |deviation| shrinks
    monotonically over the last `decade` values of n.
    """
    n_max = len(spectrum) if n_max is None else min(n_max, len(spectrum))
    rows = []
    for n in range(max(1, n_min), n_max + 1):
        a = spectrum.a(n)
        deviation = (n * a - target) / target if target else n * a
        rows.append(SpectrumRow(n, a, n * a, target, deviation))
    tail = [abs(row.deviation) for row in rows[-decade:]]
    shrinking = all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))
    return SpectrumTable(tuple(rows), target, shrinking)
