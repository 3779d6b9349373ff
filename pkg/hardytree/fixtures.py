"""Bundled tree documents, addressed on the command line as `fixture:<name>`."""
from typing import Callable, Dict, List

from hardytree.exceptions import InputError


def _edge(edge_id, source, target, length, u=1.0, v=1.0) -> dict:
    return {
        "id": edge_id,
        "from": source,
        "to": target,
        "length": length,
        "u": [{"len": length, "value": u}],
        "v": [{"len": length, "value": v}],
    }


def unit_interval() -> dict:
    return {"vertices": ["0", "1"], "edges": [_edge("e", "0", "1", 1.0)], "root": {"vertex": "0"}}


def path_0_4() -> dict:
    return {"vertices": ["0", "4"], "edges": [_edge("e", "0", "4", 4.0)], "root": {"vertex": "0"}}


def y_tree() -> dict:
    """Three unit edges meeting at `c`, rooted at the leaf `a`."""
    return {
        "vertices": ["a", "c", "b", "d"],
        "edges": [_edge("ac", "a", "c", 1.0), _edge("cb", "c", "b", 1.0), _edge("cd", "c", "d", 1.0)],
        "root": {"vertex": "a"},
    }


def _binary(levels: List[dict], root_edge: dict = None) -> dict:
    """
    A full binary tree; `levels[k]` gives length, u and v of every generation-k edge.
    """
    vertices, edges = ["r"], []
    frontier = ["r"]
    if root_edge is not None:
        vertices.append("x")
        edges.append(_edge("r-x", "r", "x", **root_edge))
        frontier = ["x"]
    for level in levels:
        grown = []
        for parent in frontier:
            for side in ("0", "1"):
                child = (parent if parent not in ("r", "x") else "") + side
                vertices.append(child)
                edges.append(_edge("{}-{}".format(parent, child), parent, child, **level))
                grown.append(child)
        frontier = grown
    return {"vertices": vertices, "edges": edges, "root": {"vertex": "r"}}


def binary_depth3() -> dict:
    """14 unit edges in three generations, u = 1 and v halving per generation."""
    return _binary([{"length": 1.0, "v": 1.0}, {"length": 1.0, "v": 0.5}, {"length": 1.0, "v": 0.25}])


def regular_b2() -> dict:
    """Branching number 2, a unit root edge and generation-k edges of length 2^k."""
    return _binary([{"length": 2.0 ** k} for k in range(3)], root_edge={"length": 1.0})


FIXTURES: Dict[str, Callable[[], dict]] = {
    "unit-interval": unit_interval,
    "path-0-4": path_0_4,
    "y-tree": y_tree,
    "binary-depth3": binary_depth3,
    "regular-b2": regular_b2,
}


def fixture_document(name: str) -> dict:
    """
    A fresh copy of the named fixture document.

        :raises InputError: for an unknown name.
    """
    try:
        return FIXTURES[name]()
    except KeyError:
        raise InputError("Unknown fixture {!r}; known: {}".format(name, ", ".join(sorted(FIXTURES))),
                         field="input") from None
