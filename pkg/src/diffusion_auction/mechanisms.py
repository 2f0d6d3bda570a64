"""Vickrey baseline, the critical diffusion mechanism (CDM) and the weighted diffusion mechanism (WDM).

Every mechanism is a function ``(graph, profile) -> AuctionOutcome`` (CDM also
takes a cut strategy).  Mechanisms only look at what the reported profile
reveals; the true valuations stored on the graph are never read here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Optional

from .critical import BETA, IDM, CutStrategy, critical_sequence, highest_bidder
from .graph import (Edge, Graph, Node, RemovalSpec, Report, TradingPath,
                    efficient_allocation, efficient_winner, format_rational,
                    informed_set, restrict, shortest_trading_path, validate_profile,
                    welfare)


class EmptyMarket(Exception):
    """No informed node submitted a bid."""


class WeightedGraph(ValueError):
    """CDM was given a graph with nonzero edge weights."""


class Unreachable(ValueError):
    pass


@dataclass(frozen=True)
class AuctionOutcome:
    mechanism: str
    winner: Optional[Node]
    path: Optional[TradingPath]
    payments: dict[Node, Fraction]
    welfare: Fraction

    @property
    def revenue(self) -> Fraction:
        path_weight = self.path.weight if self.path is not None else 0
        return sum(self.payments.values(), Fraction(0)) - path_weight

    def payment(self, node: Node) -> Fraction:
        return self.payments.get(node, Fraction(0))

    def utility(self, node: Node, value: Fraction) -> Fraction:
        return (value if node == self.winner else 0) - self.payment(node)

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "winner": self.winner,
            "path": list(self.path.nodes) if self.path is not None else [],
            "payments": {n: format_rational(x) for n, x in sorted(self.payments.items())},
            "revenue": format_rational(self.revenue),
            "welfare": format_rational(self.welfare),
        }


def _outcome(name, profile, winner, path, payments):
    return AuctionOutcome(name, winner, path, payments, profile[winner].bid - path.weight)


def vickrey(graph: Graph, profile) -> AuctionOutcome:
    """Second-price auction among the seller's direct neighbours."""
    validate_profile(graph, profile)
    bids = sorted(((profile[a].bid, a) for a in graph.neighbors(graph.seller)
                   if profile.get(a) is not None and profile[a].bid is not None),
                  key=lambda t: (-t[0], t[1]))
    if not bids:
        raise EmptyMarket("no seller neighbour bids")
    winner = bids[0][1]
    price = bids[1][0] if len(bids) > 1 else Fraction(0)
    return _outcome("vickrey", profile, winner, TradingPath((winner,), Fraction(0)), {winner: price})


def cdm(graph: Graph, profile, strategy: CutStrategy = BETA) -> AuctionOutcome:
    """Critical diffusion mechanism on an unweighted graph.

    Walks the highest bidder's critical sequence.  The first node that is the
    efficient winner once its alpha cut is removed takes the item and pays
    ``W*`` without it; every earlier node is paid ``W*`` of the cut market
    minus ``W*`` without it.
    """
    if not graph.is_unweighted():
        raise WeightedGraph("CDM is defined on zero-weight graphs; use wdm")
    validate_profile(graph, profile)
    m = highest_bidder(graph, profile)
    if m is None:
        raise EmptyMarket("no informed bidder")
    seq = critical_sequence(graph, profile, m)
    payments: dict[Node, Fraction] = {}
    winner = None
    for k, i in enumerate(seq.sequence):
        cut = strategy.compute(graph, profile, seq, k)
        cut_market = restrict(graph, profile, RemovalSpec.of_edges(cut))
        without_i = welfare(graph, profile, RemovalSpec.of_nodes(i))
        if efficient_winner(graph, cut_market) == i:
            payments[i] = without_i
            winner = i
            break
        payments[i] = without_i - welfare(graph, cut_market)
    path = shortest_trading_path(graph, profile, winner)
    return _outcome(f"cdm-{strategy.name}", profile, winner, path, payments)


# -- weighted diffusion mechanism ------------------------------------------

def intermediaries(graph: Graph, profile, i: Node) -> frozenset[Node]:
    """Neighbours of ``i`` that have some neighbour other than ``i``."""
    return frozenset(j for j in graph.neighbors(i)
                     if j != graph.seller and graph.neighbors(j) - {i})


def gamma(graph: Graph, profile, efficient_path: TradingPath, k: int,
          close_path: bool = False) -> frozenset[Edge]:
    """Cut from path node ``k`` to its intermediaries and its path successor (empty at the end).

    A later path node with no out-neighbour besides ``k`` is not an
    intermediary, so the plain cut can leave a direct arc to it.
    ``close_path`` also cuts those arcs.
    """
    nodes = efficient_path.nodes
    if k == len(nodes) - 1:
        return frozenset()
    i = nodes[k]
    targets = intermediaries(graph, profile, i) | {nodes[k + 1]}
    if close_path:
        targets |= graph.neighbors(i) & set(nodes[k + 1:])
    return frozenset((i, j) for j in targets)


@dataclass
class WdmContext:
    efficient_path: TradingPath
    gamma_cuts: dict[Node, frozenset[Edge]]
    reduced_distance: dict[tuple[Node, Node], Fraction] = field(default_factory=dict)
    secondary_nodes: frozenset[Node] = frozenset()
    critical_value: Optional[Fraction] = None

    def cut_market(self, graph, profile, i):
        return restrict(graph, profile, RemovalSpec.of_edges(self.gamma_cuts[i]))


def wdm_allocate(graph: Graph, profile, close_path: bool = False) -> tuple[Node, TradingPath, WdmContext]:
    validate_profile(graph, profile)
    eff = efficient_allocation(graph, profile)
    if eff.winner is None:
        raise EmptyMarket("no informed bidder")
    path = eff.path
    cuts = {i: gamma(graph, profile, path, k, close_path) for k, i in enumerate(path.nodes)}
    ctx = WdmContext(path, cuts)
    for i in path.nodes:
        if efficient_winner(graph, ctx.cut_market(graph, profile, i)) == i:
            return i, shortest_trading_path(graph, profile, i), ctx
    raise AssertionError("the efficient winner always wins its own uncut market")


def reduced_distance(graph: Graph, profile, ctx: WdmContext, i: Node, j: Node) -> Fraction:
    """Weight of the shortest trading path to ``j`` once ``gamma_i`` is cut."""
    key = (i, j)
    if key not in ctx.reduced_distance:
        path = shortest_trading_path(graph, ctx.cut_market(graph, profile, i), j)
        if path is None:
            raise Unreachable(f"{j} is not reachable after cutting gamma of {i}")
        ctx.reduced_distance[key] = path.weight
    return ctx.reduced_distance[key]


def secondary_nodes(graph: Graph, profile, ctx: WdmContext, g: Node) -> frozenset[Node]:
    """Path nodes before ``g`` that would win their cut market if ``g`` withdrew its bid."""
    found = set()
    prefix = ctx.efficient_path.nodes[:ctx.efficient_path.nodes.index(g)]
    for i in prefix:
        market = ctx.cut_market(graph, profile, i)
        own = market.get(g)
        if own is not None:
            market = market.replace(g, Report(None, own.diffusion))
        if efficient_winner(graph, market) == i:
            found.add(i)
    ctx.secondary_nodes = frozenset(found)
    return ctx.secondary_nodes


def wdm_pay(graph: Graph, profile, ctx: WdmContext, g: Node) -> dict[Node, Fraction]:
    payments: dict[Node, Fraction] = {}
    prefix = ctx.efficient_path.nodes[:ctx.efficient_path.nodes.index(g)]
    for i in prefix:
        payments[i] = (welfare(graph, profile, RemovalSpec.of_nodes(i))
                       - welfare(graph, ctx.cut_market(graph, profile, i)))
    critical = Fraction(0)
    for i in prefix:
        if i in ctx.secondary_nodes:
            critical = max(critical, profile[i].bid - reduced_distance(graph, profile, ctx, i, i)
                           + reduced_distance(graph, profile, ctx, i, g))
    critical = max(critical, welfare(graph, profile, RemovalSpec.of_nodes(g))
                   + reduced_distance(graph, profile, ctx, g, g))
    ctx.critical_value = critical
    payments[g] = critical
    return payments


def wdm(graph: Graph, profile) -> AuctionOutcome:
    return wdm_with_context(graph, profile)[0]


def wdm_closed(graph: Graph, profile) -> AuctionOutcome:
    """WDM whose cuts also sever direct arcs to later path nodes."""
    return wdm_with_context(graph, profile, close_path=True)[0]


def wdm_with_context(graph: Graph, profile, close_path: bool = False) -> tuple[AuctionOutcome, WdmContext]:
    g, path, ctx = wdm_allocate(graph, profile, close_path)
    secondary_nodes(graph, profile, ctx, g)
    payments = wdm_pay(graph, profile, ctx, g)
    return _outcome("wdm-closed" if close_path else "wdm", profile, g, path, payments), ctx


Mechanism = Callable[[Graph, object], AuctionOutcome]

MECHANISMS: dict[str, Mechanism] = {
    "vickrey": vickrey,
    "cdm-idm": partial(cdm, strategy=IDM),
    "cdm-beta": partial(cdm, strategy=BETA),
    "wdm": wdm,
    "wdm-closed": wdm_closed,
}


def get_mechanism(name: str) -> Mechanism:
    try:
        return MECHANISMS[name]
    except KeyError:
        raise KeyError(f"unknown mechanism {name!r}; choose from {sorted(MECHANISMS)}") from None
