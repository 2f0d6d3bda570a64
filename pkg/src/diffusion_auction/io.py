"""JSON graph files and outcome serialisation.

Graph document::

    {"seller": "s",
     "nodes": [{"id": "A", "value": "6"}, ...],
     "edges": [{"from": "s", "to": "A", "weight": "0"}, ...]}

Values and weights are exact rationals written as strings (``"6"``,
``"13/2"``, ``"1.5"``); integers are also accepted.  Unknown keys are errors.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Union

from .graph import Graph, GraphError, format_rational, rational


class ParseError(ValueError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ParseError(where, "expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(where, f"unknown keys {sorted(unknown)}")
    missing = allowed - set(obj)
    if missing:
        raise ParseError(where, f"missing keys {sorted(missing)}")


def _number(raw, where):
    if isinstance(raw, float):
        raise ParseError(where, "floats are not exact; write the number as a string")
    try:
        return rational(raw)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(where, str(exc)) from None


def _ident(raw, where):
    if not isinstance(raw, str) or not raw:
        raise ParseError(where, "node ids must be non-empty strings")
    return raw


def graph_from_dict(doc) -> Graph:
    _check_keys(doc, {"seller", "nodes", "edges"}, "graph")
    seller = _ident(doc["seller"], "seller")
    if not isinstance(doc["nodes"], list) or not isinstance(doc["edges"], list):
        raise ParseError("graph", "nodes and edges must be arrays")
    values = {}
    for k, node in enumerate(doc["nodes"]):
        where = f"nodes[{k}]"
        _check_keys(node, {"id", "value"}, where)
        ident = _ident(node["id"], where + ".id")
        if ident in values:
            raise ParseError(where + ".id", f"duplicate node {ident!r}")
        values[ident] = _number(node["value"], where + ".value")
    edges = []
    for k, edge in enumerate(doc["edges"]):
        where = f"edges[{k}]"
        _check_keys(edge, {"from", "to", "weight"}, where)
        edges.append((_ident(edge["from"], where + ".from"), _ident(edge["to"], where + ".to"),
                      _number(edge["weight"], where + ".weight")))
    return Graph(seller, values, edges)


def loads_graph(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}", exc.msg) from None
    return graph_from_dict(doc)


def parse_graph(path: Union[str, Path]) -> Graph:
    """Read and validate a graph file.

    Raises ParseError, NegativeCycle, DuplicateEdge or UnknownNode.
    """
    return loads_graph(Path(path).read_text(encoding="utf-8"))


def graph_to_dict(graph: Graph) -> dict:
    return {
        "seller": graph.seller,
        "nodes": [{"id": n, "value": format_rational(graph.values[n])} for n in graph.nodes],
        "edges": [{"from": u, "to": v, "weight": format_rational(w)} for u, v, w in graph.edges],
    }


def dumps_graph(graph: Graph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2) + "\n"


def write_graph(graph: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_graph(graph), encoding="utf-8")


def dumps_outcome(outcome) -> str:
    return json.dumps(outcome.to_json(), indent=2) + "\n"


def load_outcome(path: Union[str, Path]) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    _check_keys(doc, {"mechanism", "winner", "path", "payments", "revenue", "welfare"}, "outcome")
    return doc


def fixture_text(name: str) -> str:
    return resources.files("diffusion_auction").joinpath("data", f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str = "fig1") -> Graph:
    """Bundled example graphs (``fig1``: the running example with eight buyers)."""
    return loads_graph(fixture_text(name))


__all__ = ["ParseError", "GraphError", "parse_graph", "loads_graph", "dumps_graph", "write_graph",
           "graph_from_dict", "graph_to_dict", "dumps_outcome", "load_outcome", "load_fixture"]
