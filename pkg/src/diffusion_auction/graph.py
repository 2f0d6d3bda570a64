"""Graph substrate for diffusion auctions.

A :class:`Graph` holds the true environment: the seller, every buyer's
valuation and the weighted directed edges between nodes.  A reported profile
maps each buyer to a :class:`Report` (bid plus diffusion set) or ``None`` for
a nil type.  Everything a mechanism needs to know about the market is
derived from the pair (graph, profile):

* the informed set (who heard about the sale),
* shortest trading paths (seller edges never count towards path weight),
* the efficient allocation and its welfare ``W*``,
* removal of nodes and edges (``t'_{-x}``).

All arithmetic is exact (:class:`fractions.Fraction`).
"""
from __future__ import annotations

import contextvars
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

Node = str
Edge = tuple[Node, Node]
RationalLike = Union[int, str, Fraction]


class GraphError(ValueError):
    pass


class NegativeCycle(GraphError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("negative cycle: " + " -> ".join(self.cycle + self.cycle[:1]))


class DuplicateEdge(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class InvalidReport(ValueError):
    pass


def rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, a Fraction or a string.

    Strings may be integers (``"6"``), ratios (``"13/2"``) or finite
    decimals (``"1.25"``).  Floats are refused because they are not exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in "eE"):
            raise ValueError(f"not a rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Graph:
    """Weighted digraph with a distinguished seller.

    ``values`` maps every buyer (non-seller node) to its true valuation and
    ``edges`` holds ``(from, to, weight)`` triples.  The true neighbour set
    of a node is its out-neighbourhood.  Construction rejects duplicate
    edges, self-loops, unknown endpoints, negative valuations and negative
    cycles.
    """

    def __init__(self, seller: Node, values: Mapping[Node, RationalLike],
                 edges: Iterable[tuple[Node, Node, RationalLike]]):
        self.seller = seller
        self.values: dict[Node, Fraction] = {}
        for node, value in values.items():
            if node == seller:
                raise GraphError(f"seller {seller!r} cannot carry a valuation")
            v = rational(value)
            if v < 0:
                raise GraphError(f"valuation of {node!r} is negative")
            self.values[node] = v
        self.nodes: tuple[Node, ...] = tuple(sorted(self.values))
        members = set(self.nodes) | {seller}

        self.weights: dict[Edge, Fraction] = {}
        out: dict[Node, set[Node]] = {n: set() for n in members}
        for u, v, w in edges:
            for end in (u, v):
                if end not in members:
                    raise UnknownNode(f"edge ({u}, {v}) references unknown node {end!r}")
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if (u, v) in self.weights:
                raise DuplicateEdge(f"duplicate edge ({u}, {v})")
            self.weights[(u, v)] = rational(w)
            out[u].add(v)
        self._out = {n: frozenset(s) for n, s in out.items()}
        assert_no_negative_cycles(self)

    def neighbors(self, node: Node) -> frozenset[Node]:
        """True neighbour set ``r_i`` (out-neighbours)."""
        return self._out[node]

    def in_neighbors(self, node: Node) -> frozenset[Node]:
        return frozenset(u for (u, v) in self.weights if v == node)

    def weight(self, u: Node, v: Node) -> Fraction:
        return self.weights[(u, v)]

    @property
    def edges(self) -> list[tuple[Node, Node, Fraction]]:
        return [(u, v, w) for (u, v), w in sorted(self.weights.items())]

    def is_unweighted(self) -> bool:
        return all(w == 0 for w in self.weights.values())

    def zero_weights(self) -> "Graph":
        return Graph(self.seller, self.values, [(u, v, 0) for u, v, _ in self.edges])

    def truthful_profile(self) -> "ReportedProfile":
        return ReportedProfile({n: Report(self.values[n], self._out[n]) for n in self.nodes})

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.seller, self.values, self.weights) == (other.seller, other.values, other.weights)

    def __hash__(self):
        return hash((self.seller, frozenset(self.values.items()), frozenset(self.weights.items())))

    def __repr__(self):
        return f"Graph(seller={self.seller!r}, nodes={len(self.nodes)}, edges={len(self.weights)})"


@dataclass(frozen=True)
class Report:
    """A reported type: a bid (``None`` means relay without bidding) and a diffusion set."""

    bid: Optional[Fraction]
    diffusion: frozenset[Node] = frozenset()


class ReportedProfile(Mapping):
    """Immutable map node -> :class:`Report` or ``None`` (nil type).

    Nodes missing from the map are nil.
    """

    __slots__ = ("_reports", "_hash")

    def __init__(self, reports: Mapping[Node, Optional[Report]] = ()):
        self._reports = dict(reports)
        self._hash = None

    def __getitem__(self, node):
        return self._reports[node]

    def get(self, node, default=None):
        return self._reports.get(node, default)

    def __iter__(self):
        return iter(self._reports)

    def __len__(self):
        return len(self._reports)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.non_nil().items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, ReportedProfile):
            return self.non_nil() == other.non_nil()
        return NotImplemented

    def non_nil(self) -> dict[Node, Report]:
        return {n: r for n, r in self._reports.items() if r is not None}

    def replace(self, node: Node, report: Optional[Report]) -> "ReportedProfile":
        reports = dict(self._reports)
        reports[node] = report
        return ReportedProfile(reports)

    def __repr__(self):
        return f"ReportedProfile({self.non_nil()!r})"


def validate_profile(graph: Graph, profile: Mapping[Node, Optional[Report]]) -> None:
    for node, report in profile.items():
        if node not in graph.values:
            raise UnknownNode(f"report for unknown node {node!r}")
        if report is None:
            continue
        if report.bid is not None and report.bid < 0:
            raise InvalidReport(f"negative bid from {node!r}")
        extra = report.diffusion - graph.neighbors(node)
        if extra:
            raise InvalidReport(f"{node!r} diffuses to non-neighbours {sorted(extra)}")


@dataclass(frozen=True)
class TradingPath:
    nodes: tuple[Node, ...]
    weight: Fraction

    @property
    def target(self) -> Node:
        return self.nodes[-1]

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class RemovalSpec:
    nodes: frozenset[Node] = frozenset()
    edges: frozenset[Edge] = frozenset()

    @classmethod
    def of_nodes(cls, *nodes: Node) -> "RemovalSpec":
        return cls(nodes=frozenset(nodes))

    @classmethod
    def of_edges(cls, edges: Iterable[Edge]) -> "RemovalSpec":
        return cls(edges=frozenset(edges))


@dataclass(frozen=True)
class WelfareResult:
    winner: Optional[Node]
    welfare: Fraction
    path: Optional[TradingPath] = field(default=None)


def assert_no_negative_cycles(graph: Graph) -> None:
    """Raise :class:`NegativeCycle` if any directed cycle has negative weight.

    Bellman-Ford from a virtual source attached to every node, ``n`` rounds;
    an improvement in the last round proves a negative cycle.
    """
    members = list(graph.nodes) + [graph.seller]
    dist = {n: Fraction(0) for n in members}
    pred: dict[Node, Optional[Node]] = {n: None for n in members}
    edges = list(graph.weights.items())
    changed = None
    for _ in range(len(members)):
        changed = None
        for (u, v), w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = u
                changed = v
        if changed is None:
            return
    # walk back far enough to land on the cycle, then collect it
    node = changed
    for _ in range(len(members)):
        node = pred[node]
    cycle = [node]
    cur = pred[node]
    while cur != node:
        cycle.append(cur)
        cur = pred[cur]
    cycle.reverse()
    raise NegativeCycle(cycle)


def informed_set(graph: Graph, profile: Mapping[Node, Optional[Report]]) -> frozenset[Node]:
    """Nodes reachable from the seller's neighbours over reported diffusion edges.

    Only nodes with a non-nil report count as informed; nil nodes neither
    join nor relay.
    """
    seen = {a for a in graph.neighbors(graph.seller) if profile.get(a) is not None}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v in profile[u].diffusion:
            if v not in seen and v != graph.seller and profile.get(v) is not None:
                seen.add(v)
                queue.append(v)
    return frozenset(seen)


def restrict(graph: Graph, profile: Mapping[Node, Optional[Report]],
             removal: RemovalSpec) -> ReportedProfile:
    """The profile ``t'_{-x}``: drop ``removal`` and nil every node that is no longer informed."""
    reports = dict(profile)
    for node in removal.nodes:
        reports[node] = None
    by_source: dict[Node, set[Node]] = {}
    for u, v in removal.edges:
        by_source.setdefault(u, set()).add(v)
    for u, targets in by_source.items():
        r = reports.get(u)
        if r is not None and r.diffusion & targets:
            reports[u] = Report(r.bid, r.diffusion - targets)
    informed = informed_set(graph, reports)
    return ReportedProfile({n: (r if n in informed else None) for n, r in reports.items()})


def _distances(graph: Graph, profile, informed) -> dict[Node, Fraction]:
    """Shortest trading-path weight to every informed node (Bellman-Ford)."""
    starts = graph.neighbors(graph.seller) & informed
    dist = {a: Fraction(0) for a in starts}
    edges = [(u, v, graph.weights[(u, v)])
             for u in informed for v in profile[u].diffusion if v in informed]
    for _ in range(len(informed)):
        changed = False
        for u, v, w in edges:
            du = dist.get(u)
            if du is None:
                continue
            nd = du + w
            dv = dist.get(v)
            if dv is None or nd < dv:
                dist[v] = nd
                changed = True
        if not changed:
            break
    return dist


def _lex_smallest_path(graph: Graph, profile, informed, dist, target) -> tuple[Node, ...]:
    # Minimum-weight paths use only tight edges (dist[u] + w == dist[v]).  Among
    # those, keep the edges that advance the hop count by one: every path in
    # this layered subgraph is a fewest-hop minimum-weight path (and simple).
    starts = [a for a in graph.neighbors(graph.seller) & informed if dist[a] == 0]
    hops = {a: 0 for a in starts}
    frontier = sorted(starts)
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(profile[u].diffusion):
                if v in informed and v not in hops and dist[u] + graph.weights[(u, v)] == dist[v]:
                    hops[v] = hops[u] + 1
                    nxt.append(v)
        frontier = nxt
    layered = {u: sorted(v for v in profile[u].diffusion
                         if v in hops and hops[v] == hops[u] + 1
                         and dist[u] + graph.weights[(u, v)] == dist[v])
               for u in hops}
    # Nodes from which the target is reachable inside the layered subgraph.
    good = {target}
    for layer in range(hops[target] - 1, -1, -1):
        good |= {u for u in hops if hops[u] == layer and any(v in good for v in layered[u])}
    node = min(a for a in starts if a in good)
    path = [node]
    while node != target:
        node = next(v for v in layered[node] if v in good)
        path.append(node)
    return tuple(path)


def shortest_trading_path(graph: Graph, profile: Mapping[Node, Optional[Report]],
                          target: Node) -> Optional[TradingPath]:
    """Minimum-weight trading path to ``target``.

    Equal-weight paths are ordered by hop count, then by node sequence.
    """
    informed = informed_set(graph, profile)
    if target not in informed:
        return None
    dist = _distances(graph, profile, informed)
    return TradingPath(_lex_smallest_path(graph, profile, informed, dist, target), dist[target])


# Optional per-context log of efficient-allocation score ties (see harness).
_TIE_LOG: contextvars.ContextVar[Optional[list]] = contextvars.ContextVar("tie_log", default=None)


def _scores(graph: Graph, profile):
    informed = informed_set(graph, profile)
    dist = _distances(graph, profile, informed)
    scores = {i: profile[i].bid - dist[i] for i in informed if profile[i].bid is not None}
    log = _TIE_LOG.get()
    if log is not None:
        log.append(scores)
    return informed, dist, scores


def _best(scores):
    return min(scores, key=lambda i: (-scores[i], i))


def efficient_allocation(graph: Graph, profile: Mapping[Node, Optional[Report]]) -> WelfareResult:
    """Efficient allocation ``pi*`` and welfare ``W*`` of the reported market.

    The winner maximises ``bid - shortest path weight`` over informed bidders,
    ties broken by the smallest node id.  An empty market has welfare 0.
    """
    informed, dist, scores = _scores(graph, profile)
    if not scores:
        return WelfareResult(None, Fraction(0), None)
    winner = _best(scores)
    path = TradingPath(_lex_smallest_path(graph, profile, informed, dist, winner), dist[winner])
    return WelfareResult(winner, scores[winner], path)


def efficient_winner(graph: Graph, profile) -> Optional[Node]:
    scores = _scores(graph, profile)[2]
    return _best(scores) if scores else None


def welfare(graph: Graph, profile, removal: Optional[RemovalSpec] = None) -> Fraction:
    """``W*`` of ``profile``, optionally after ``removal``."""
    if removal is not None:
        profile = restrict(graph, profile, removal)
    scores = _scores(graph, profile)[2]
    return max(scores.values()) if scores else Fraction(0)
