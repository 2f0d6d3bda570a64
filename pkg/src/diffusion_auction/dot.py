"""Graphviz DOT export."""
from __future__ import annotations

from typing import Optional, Sequence

from .graph import Graph, format_rational


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: Graph, path: Optional[Sequence[str]] = None, winner: Optional[str] = None) -> str:
    """Render ``graph``; node labels carry values, edge labels weights.

    ``path`` (an allocation path, seller excluded) is drawn in red, with the
    arc from the seller to its first node; ``winner`` gets a double circle.
    """
    on_path = set()
    if path:
        hops = [graph.seller] + list(path)
        on_path = set(zip(hops, hops[1:]))
    lines = ["digraph auction {", "  rankdir=LR;",
             f"  {_quote(graph.seller)} [label={_quote(graph.seller)}, shape=box];"]
    for n in graph.nodes:
        attrs = [f"label={_quote(f'{n} ({format_rational(graph.values[n])})')}"]
        if n == winner:
            attrs.append("shape=doublecircle")
        if path and n in path:
            attrs.append("color=red")
        lines.append(f"  {_quote(n)} [{', '.join(attrs)}];")
    for u, v, w in graph.edges:
        attrs = [f"label={_quote(format_rational(w))}"]
        if (u, v) in on_path:
            attrs += ["color=red", "penwidth=2"]
        lines.append(f"  {_quote(u)} -> {_quote(v)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
