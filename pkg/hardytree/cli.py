"""
Command-line front end.

    hardytree <command> --input <tree.json | fixture:name> [options]

Commands: validate, norm, afun, approx, partition, scan, sigma, bounds, verify.
Exit codes: 0 ok, 1 a check failed, 2 usage or configuration error, 3 input error.
"""
import argparse
import traceback
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from hardytree import __version__
from hardytree.acceptance import AcceptanceSuite
from hardytree.asymptotics import (
    alpha_p,
    boundedness_check,
    lq_bound_checks,
    norm_lower_bound,
    p1_inf_bounds,
    sigma_table,
)
from hardytree.checks import CheckReport
from hardytree.config_manager import ConfigManager, RunConfig, TreeInput
from hardytree.exceptions import (
    ConfigError,
    DomainError,
    HardyTreeError,
    InfeasibleError,
    InputError,
    InvalidLocationError,
    TreeStructureError,
    UnsupportedExponentError,
    WeightError,
)
from hardytree.geometry.subtree import Subtree
from hardytree.helper import emit_plot, header, write_table
from hardytree.log.logging import Logger
from hardytree.operators import A_value, DiscretizedOperator, approx_numbers_p2, op_norm
from hardytree.partition import RegionEvaluator, asymptotic_scan, compute_M, compute_N, spectrum_scan
from hardytree.weights import integral_product, lp_norm

LOGGER = Logger.get_logger("hardytree")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3
COMMANDS = {
    "validate": "Parse a tree document and report its basic quantities",
    "norm": "Operator norm of T on the whole tree",
    "afun": "The quotient norm A of the whole tree",
    "approx": "Approximation numbers a_n and n*a_n (p = 2)",
    "partition": "Covering and packing at eps-start",
    "scan": "N and M along the eps schedule next to alpha_p * int uv",
    "sigma": "Level sets of U with their sigma and B values",
    "bounds": "Two-sided norm bounds and the sequence-norm inequalities",
    "verify": "Run the acceptance suite on the bundled fixtures",
}
INPUT_ERRORS = (InputError, WeightError, TreeStructureError, InvalidLocationError, OSError)
USAGE_ERRORS = (ConfigError, UnsupportedExponentError, DomainError, InfeasibleError)
DEFAULT_Q = (1.0, 2.0)


@dataclass
class CommandResult:
    """Rows of one command with what its artifacts need besides them."""

    rows: List[dict]
    columns: Optional[Sequence[str]] = None
    extra: Dict[str, object] = field(default_factory=dict)
    points: List[Tuple[float, float]] = field(default_factory=list)
    target: float = 0.0
    labels: Tuple[str, str] = ("eps", "eps*N")
    passed: bool = True


def _describe(part: Subtree) -> str:
    return ";".join("{}[{:.9g},{:.9g}]".format(s.edge, s.lo, s.hi) for s in part.segments)


def validate(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    p = config.pnorm
    tree = data.tree
    rows = [
        {"quantity": "vertices", "value": len(tree.vertices)},
        {"quantity": "edges", "value": len(tree.edges)},
        {"quantity": "leaves", "value": len(tree.leaves())},
        {"quantity": "total_length", "value": tree.total_length()},
        {"quantity": "root", "value": repr(data.root)},
        {"quantity": "int_uv", "value": integral_product(u, v, K)},
        {"quantity": "norm_u_conjugate", "value": lp_norm(u, p.dual, K)},
        {"quantity": "norm_v_p", "value": lp_norm(v, p, K)},
    ]
    LOGGER.info("{} is a valid tree document".format(data.source))
    return CommandResult(rows, ("quantity", "value"))


def norm(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    estimate = op_norm(DiscretizedOperator(K, u, v, config.pnorm, config.grid), seed=config.seed)
    rows = [{
        "norm": estimate.value,
        "lower_bound": norm_lower_bound(K, u, v, config.pnorm),
        "converged": estimate.converged,
        "iterations": estimate.iterations,
        "method": estimate.method,
    }]
    return CommandResult(rows)


def afun(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    result = A_value(K, u, v, config.pnorm, config.grid, seed=config.seed)
    rows = [{"A": result.value, "method": result.method, "root": repr(result.root), "certified": result.certified}]
    return CommandResult(rows)


def approx(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, config.pnorm, config.grid), config.n_max)
    target = alpha_p(config.pnorm).value * integral_product(u, v, K)
    table = spectrum_scan(spectrum, target, 1, config.n_max)
    rows = [
        {"n": row.n, "a_n": row.a_n, "n_a_n": row.n_a_n, "target": row.target, "deviation": row.deviation}
        for row in table.rows
    ]
    return CommandResult(
        rows,
        extra={"shrinking": table.shrinking},
        points=[(row.n, row.n_a_n) for row in table.rows],
        target=target,
        labels=("n", "n*a_n"),
    )


def partition(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    eps = config.eps_start
    evaluator = RegionEvaluator(K, u, v, config.pnorm, config.grid, config.seed)
    covering = compute_N(K, u, v, config.pnorm, eps, config.grid, evaluator=evaluator)
    packing = compute_M(K, u, v, config.pnorm, eps, config.grid, evaluator=evaluator)
    rows = [
        {"kind": kind, "part": index + 1, "length": part.length(), "A": value, "segments": _describe(part)}
        for kind, parts, values in (
            ("cover", covering.parts, covering.values),
            ("pack", packing.parts, packing.values),
        )
        for index, (part, value) in enumerate(zip(parts, values))
    ]
    extra = {"eps": eps, "N": covering.count, "M": packing.count, "mode": covering.mode}
    return CommandResult(rows, ("kind", "part", "length", "A", "segments"), extra)


SCAN_COLUMNS = (
    "table", "n", "a_n", "n_a_n", "eps", "N", "N_exact", "M", "epsN", "epsM", "target", "deviation", "flagged",
)


def scan(config: RunConfig, data: TreeInput) -> CommandResult:
    """n a_n rows first (p = 2 only), then one row per eps; the smallest eps comes last."""
    K, u, v = data.problem
    p = config.pnorm
    table = asymptotic_scan(K, u, v, p, config.schedule, config.grid, workers=config.workers, seed=config.seed)
    rows = []
    if p.p == 2:
        spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, p, config.grid), config.n_max)
        for row in spectrum_scan(spectrum, table.target, 1, config.n_max).rows:
            rows.append({"table": "spectrum", "n": row.n, "a_n": row.a_n, "n_a_n": row.n_a_n,
                         "target": row.target, "deviation": row.deviation})
    for row in table.rows:
        rows.append({
            "table": "partition",
            "eps": row.eps,
            "N": row.N,
            "N_exact": row.N_exact,
            "M": row.M,
            "epsN": row.epsN,
            "epsM": row.epsM,
            "target": row.target,
            "deviation": (row.epsN - row.target) / row.target if row.target else row.epsN,
            "flagged": row.flagged,
        })
    return CommandResult(
        rows,
        SCAN_COLUMNS,
        extra={"monotone": table.monotone},
        points=[(row.eps, row.epsN) for row in table.rows],
        target=table.target,
    )


def sigma(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    table = sigma_table(K, u, v, config.pnorm)
    extra = {"levels": len(table), "lowest_k": table.lowest_k, "truncated_mass": table.truncated_mass}
    return CommandResult(table.rows(), ("k", "i", "mu", "sigma", "B"), extra)


def bounds(config: RunConfig, data: TreeInput) -> CommandResult:
    K, u, v = data.problem
    p = config.pnorm
    report = CheckReport("bounds")
    report.extend(boundedness_check(K, u, v, p, grid=config.grid, seed=config.seed))
    if p.p == 2:
        spectrum = approx_numbers_p2(DiscretizedOperator(K, u, v, p, config.grid))
        table = sigma_table(K, u, v, p)
        evaluator = RegionEvaluator(K, u, v, p, config.grid, config.seed)
        packings = [compute_M(K, u, v, p, eps, config.grid, evaluator=evaluator) for eps in config.schedule]
        for q in (config.q,) if config.q is not None else DEFAULT_Q:
            report.extend(lq_bound_checks(spectrum, table, q, packings, u, v, config.grid, config.seed))
    elif p.p == 1 or not p.is_finite:
        which = "p1" if p.p == 1 else "pinf"
        try:
            report.extend(p1_inf_bounds(K, u, v, which, grid=config.grid, seed=config.seed))
        except DomainError as e:
            LOGGER.warning("Skipping the interval estimates: {}".format(e))
    rows = report.rows()
    return CommandResult(rows, ("report", "check", "value", "bound", "direction", "asserted", "passed", "note"),
                         passed=report.passed)


def verify(config: RunConfig, data: Optional[TreeInput]) -> CommandResult:
    rows = AcceptanceSuite(config).run()
    passed = all(row["passed"] for row in rows if row["asserted"])
    return CommandResult(rows, ("criterion", "check", "value", "bound", "asserted", "passed"), passed=passed)


HANDLERS = {
    "validate": validate,
    "norm": norm,
    "afun": afun,
    "approx": approx,
    "partition": partition,
    "scan": scan,
    "sigma": sigma,
    "bounds": bounds,
    "verify": verify,
}


def run(config: RunConfig, manager: Optional[ConfigManager] = None) -> int:
    """
    Runs one command and writes its artifacts.

        :return: EXIT_OK, or EXIT_FAILED when an asserted check failed.
        :raises ConfigError: for a command that needs --input without one.
    """
    config.validate()
    manager = manager or ConfigManager()
    data = None
    if config.command != "verify":
        if config.input is None:
            raise ConfigError("--input is required for {}".format(config.command))
        root = None if config.root_edge is None else (config.root_edge, config.root_offset)
        data = manager.load(config.input, root=root)
    LOGGER.info("Running {} (config {})".format(config.command, config.config_hash()[:12]))
    result = HANDLERS[config.command](config, data)

    block = header(config, **result.extra)
    write_table(result.rows, config, block, result.columns, config.out)
    if config.svg is not None:
        emit_plot(result.points, result.target, config.svg, block, *result.labels)
    if not result.passed:
        LOGGER.error("{}: at least one asserted check failed".format(config.command))
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="Tree document path or fixture:<name>")
    common.add_argument("--p", default="2", help="Exponent p >= 1, or inf")
    common.add_argument("--grid", type=int, default=256, help="Quadrature cells per edge (>= 64)")
    common.add_argument("--eps-start", type=float, default=0.2)
    common.add_argument("--eps-factor", type=float, default=0.5)
    common.add_argument("--eps-count", type=int, default=5)
    common.add_argument("--n-max", type=int, default=60, help="Largest n of the approximation numbers")
    common.add_argument("--out", help="Output file, stdout when omitted")
    common.add_argument("--format", default="csv", help="csv or json")
    common.add_argument("--svg", help="Also write an SVG plot to this path")
    common.add_argument("--seed", type=int, default=20240101)
    common.add_argument("--workers", type=int, default=1, help="Worker threads for eps sweeps")
    common.add_argument("--log-level", default="INFO")
    common.add_argument("--log-file", help="Also log to this rotating file")
    common.add_argument("--root-edge", help="Edge of a root overriding the document's")
    common.add_argument("--root-offset", type=float, help="Offset of that root along the edge")
    common.add_argument("--q", type=float, help="Sequence exponent for bounds (default: 1 and 2)")

    parser = argparse.ArgumentParser(
        prog="hardytree",
        description="Hardy operators on weighted metric trees: norms, approximation numbers and partitions.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name, summary in COMMANDS.items():
        commands.add_parser(name, parents=[common], help=summary)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=args.input,
        p=args.p,
        grid=args.grid,
        eps_start=args.eps_start,
        eps_factor=args.eps_factor,
        eps_count=args.eps_count,
        n_max=args.n_max,
        out=args.out,
        format=args.format,
        svg=args.svg,
        seed=args.seed,
        workers=args.workers,
        log_level=args.log_level,
        root_edge=args.root_edge,
        root_offset=args.root_offset,
        q=args.q,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        LOGGER.configure(level=args.log_level, log_file=args.log_file)
    except (ValueError, OSError) as e:
        LOGGER.error("Invalid logging setup: {}".format(e))
        return EXIT_USAGE
    config = _config(args)
    try:
        return run(config)
    except INPUT_ERRORS as e:
        LOGGER.error("Input error: {}".format(e))
        return EXIT_INPUT
    except USAGE_ERRORS as e:
        LOGGER.error("{}: {}".format(type(e).__name__, e))
        return EXIT_USAGE
    except HardyTreeError as e:
        LOGGER.error("{} failed: {}\nTraceback: {}".format(config.command, e, traceback.format_exc()))
        return EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
