import dataclasses
import hashlib
import json
import math
import traceback
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

from hardytree.exceptions import (
    ConfigError,
    DomainError,
    InputError,
    InvalidLocationError,
    TreeStructureError,
    WeightError,
)
from hardytree.fixtures import fixture_document
from hardytree.geometry.subtree import Subtree
from hardytree.geometry.tree import Location, MetricTree, RootedTree, root_at
from hardytree.log.logging import Logger
from hardytree.weights import PNorm, StepWeight

LOGGER = Logger.get_logger("hardytree")

FIXTURE_PREFIX = "fixture:"
FORMATS = ("csv", "json")
MIN_GRID = 64


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one command needs; the CSV/JSON headers record its hash.
    """

    command: str
    input: Optional[str] = None
    p: str = "2"
    grid: int = 256
    eps_start: float = 0.2
    eps_factor: float = 0.5
    eps_count: int = 5
    n_max: int = 60
    out: Optional[str] = None
    format: str = "csv"
    svg: Optional[str] = None
    seed: int = 20240101
    workers: int = 1
    log_level: str = "INFO"
    root_edge: Optional[str] = None
    root_offset: Optional[float] = None
    q: Optional[float] = None

    @property
    def pnorm(self) -> PNorm:
        return PNorm.parse(self.p)

    @property
    def schedule(self) -> Tuple[float, ...]:
        return tuple(self.eps_start * self.eps_factor ** k for k in range(self.eps_count))

    def validate(self) -> "RunConfig":
        """
        Checks the invariants of a run.

            :raises ConfigError: naming the offending setting.
        """
        try:
            self.pnorm
        except (DomainError, ValueError) as e:
            raise ConfigError("Invalid p {!r}: {}".format(self.p, e)) from None
        if self.grid < MIN_GRID:
            raise ConfigError("grid must be at least {}, got {}".format(MIN_GRID, self.grid))
        if not (self.eps_start > 0 and 0 < self.eps_factor < 1 and self.eps_count >= 1):
            raise ConfigError(
                "eps schedule must be strictly decreasing: start > 0, 0 < factor < 1, count >= 1 "
                "(got {}, {}, {})".format(self.eps_start, self.eps_factor, self.eps_count)
            )
        if self.n_max < 1:
            raise ConfigError("n-max must be at least 1, got {}".format(self.n_max))
        if self.workers < 1:
            raise ConfigError("workers must be at least 1, got {}".format(self.workers))
        if self.format not in FORMATS:
            raise ConfigError("format must be one of {}, got {!r}".format(", ".join(FORMATS), self.format))
        if (self.root_edge is None) != (self.root_offset is None):
            raise ConfigError("root-edge and root-offset must be given together")
        if self.q is not None and not self.q >= 1:
            raise ConfigError("q must be at least 1, got {}".format(self.q))
        return self

    def config_hash(self) -> str:
        canonical = json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class TreeInput:
    """A parsed tree document: the tree, both weights and the root."""

    source: str
    tree: MetricTree
    u: StepWeight
    v: StepWeight
    root: Location

    @cached_property
    def host(self) -> RootedTree:
        return root_at(self.tree, self.root)

    @cached_property
    def problem(self) -> Tuple[Subtree, StepWeight, StepWeight]:
        """The whole tree as a subtree of the rooted host, with u and v carried over."""
        return Subtree.whole(self.host), self.u.on_rooted(self.host), self.v.on_rooted(self.host)


class ConfigManager:
    """
    Reads and writes tree documents:
    {"vertices": [...], "edges": [{"id", "from", "to", "length", "u": [{"len", "value"}], "v": [...]}],
     "root": {"edge", "offset"} or {"vertex"}}.
    """

    def load(self, source: str, root: Optional[Tuple[str, float]] = None) -> TreeInput:
        """
        Loads a document from a path or a bundled fixture.

            :param source: File path or "fixture:<name>".
            :param root: (edge id, offset) overriding the document's root.
            :raises InputError: for unreadable or malformed documents, with line or field.
        """
        LOGGER.info("Loading tree document {}".format(source))
        if source.startswith(FIXTURE_PREFIX):
            document = fixture_document(source[len(FIXTURE_PREFIX):])
        else:
            document = self.read_document(source)
        if root is not None:
            document = dict(document, root={"edge": root[0], "offset": root[1]})
        return self.parse_document(document, source)

    def read_document(self, path: str) -> dict:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InputError("Cannot read {}: {}".format(path, e.strerror or e), field="input") from None
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError("Malformed JSON: {} at column {}".format(e.msg, e.colno), line=e.lineno) from None

    def parse_document(self, document, source: str = "<document>") -> TreeInput:
        """
        Builds the tree, the weights and the root from a decoded document.

            :raises InputError: naming the offending field.
            :raises WeightError: naming the edge whose pieces do not add up.
        """
        if not isinstance(document, dict):
            raise InputError("Document must be a JSON object", field="$")
        vertices = _require(document, "vertices", list, "vertices")
        edges = _require(document, "edges", list, "edges")
        tree_edges, u_pieces, v_pieces = [], {}, {}
        for index, item in enumerate(edges):
            where = "edges[{}]".format(index)
            if not isinstance(item, dict):
                raise InputError("Edge entry must be an object", field=where)
            edge_id = str(_require(item, "id", (str, int), where + ".id"))
            length = _number(item, "length", where + ".length")
            tree_edges.append(
                (edge_id, _require(item, "from", (str, int), where + ".from"),
                 _require(item, "to", (str, int), where + ".to"), length)
            )
            u_pieces[edge_id] = _pieces(item, "u", where)
            v_pieces[edge_id] = _pieces(item, "v", where)

        try:
            tree = MetricTree(vertices, tree_edges)
            u = StepWeight(tree, u_pieces)
            v = StepWeight(tree, v_pieces)
            root = _root(tree, document.get("root"))
        except (TreeStructureError, InvalidLocationError, WeightError) as e:
            LOGGER.error("Invalid tree in {}: {}\nTraceback: {}".format(source, e, traceback.format_exc()))
            raise
        return TreeInput(source, tree, u, v, root)

    def dump(self, tree: MetricTree, u: StepWeight, v: StepWeight, root: Location, path: Optional[str] = None) -> dict:
        """Writes the document back in the same schema; returns it and saves it when `path` is given."""
        document = {
            "vertices": list(tree.vertices),
            "edges": [
                {
                    "id": edge.id,
                    "from": edge.source,
                    "to": edge.target,
                    "length": edge.length,
                    "u": _dump_profile(u.profiles[edge.id]),
                    "v": _dump_profile(v.profiles[edge.id]),
                }
                for edge in tree.edges.values()
            ],
            "root": {"vertex": root.vertex} if root.is_vertex else {"edge": root.edge, "offset": root.offset},
        }
        if path is not None:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(document, f, indent=2)
            LOGGER.debug("Wrote tree document to {}".format(path))
        return document


def _require(mapping: dict, key: str, kind, field: str):
    if key not in mapping:
        raise InputError("Missing required field", field=field)
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise InputError("Field has the wrong type {}".format(type(value).__name__), field=field)
    return value


def _number(mapping: dict, key: str, field: str) -> float:
    value = float(_require(mapping, key, (int, float), field))
    if not math.isfinite(value):
        raise InputError("Field must be finite", field=field)
    return value


def _pieces(item: dict, key: str, where: str):
    field = "{}.{}".format(where, key)
    pieces = _require(item, key, list, field)
    out = []
    for index, piece in enumerate(pieces):
        at = "{}[{}]".format(field, index)
        if not isinstance(piece, dict):
            raise InputError("Weight piece must be an object", field=at)
        out.append((_number(piece, "len", at + ".len"), _number(piece, "value", at + ".value")))
    return out


def _root(tree: MetricTree, entry) -> Location:
    if entry is None:
        raise InputError("Missing required field", field="root")
    if not isinstance(entry, dict):
        raise InputError("Root must be an object", field="root")
    if "vertex" in entry:
        return tree.vertex_location(entry["vertex"])
    edge_id = str(_require(entry, "edge", (str, int), "root.edge"))
    return tree.location(edge_id, _number(entry, "offset", "root.offset"))


def _dump_profile(profile):
    return [{"len": float(length), "value": float(value)} for length, value in zip(profile.lengths, profile.values)]
