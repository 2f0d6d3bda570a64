"""Critical diffusion sequences, dependent sets and alpha cut strategies.

A node ``c`` is critical for ``i`` when every trading path to ``i`` passes
through ``c``; removing ``c`` silences ``i``.  The critical nodes of ``i``
form a chain ordered by how much of the market each one controls, which is
the sequence walked by the critical diffusion mechanism.

A cut strategy picks, for position ``k`` of the highest bidder's critical
sequence, an edge set whose removal blocks the next critical node.  Two are
shipped: ``idm`` (all in-edges of the next critical node) and ``beta`` (the
smallest set of out-edges of the current node).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .graph import (Edge, Graph, Node, RemovalSpec, Report, ReportedProfile,
                    informed_set, restrict)

EdgeCut = frozenset  # frozenset[Edge]


class TargetUninformed(ValueError):
    pass


class LastPosition(ValueError):
    pass


@dataclass(frozen=True)
class CriticalSequence:
    target: Node
    sequence: tuple[Node, ...]

    def __len__(self):
        return len(self.sequence)

    def __getitem__(self, k):
        return self.sequence[k]


def _removal_silences(graph, profile, node) -> frozenset[Node]:
    before = informed_set(graph, profile)
    after = informed_set(graph, restrict(graph, profile, RemovalSpec.of_nodes(node)))
    return before - after


def dependents(graph: Graph, profile, node: Node) -> frozenset[Node]:
    """``d_i``: informed nodes that lose access to the sale when ``node`` is removed (``node`` included)."""
    if node not in informed_set(graph, profile):
        raise TargetUninformed(node)
    return _removal_silences(graph, profile, node)


def critical_sequence(graph: Graph, profile, target: Node) -> CriticalSequence:
    informed = informed_set(graph, profile)
    if target not in informed:
        raise TargetUninformed(target)
    deps = {c: _removal_silences(graph, profile, c) for c in informed}
    critical = [c for c in informed if target in deps[c]]
    # d_j strictly contains d_k whenever j precedes k
    critical.sort(key=lambda c: -len(deps[c]))
    return CriticalSequence(target, tuple(critical))


def _check_position(seq: CriticalSequence, k: int) -> None:
    if not 0 <= k < len(seq):
        raise IndexError(f"position {k} outside critical sequence of length {len(seq)}")
    if k == len(seq) - 1:
        raise LastPosition(f"no cut after the last critical node {seq[k]!r}")


def alpha_idm(graph: Graph, profile, seq: CriticalSequence, k: int) -> EdgeCut:
    """Every true in-edge of the next critical node.

    Built from the true edge set, so the cut never depends on anyone's
    report; edges nobody reported are removed as a no-op.
    """
    _check_position(seq, k)
    nxt = seq[k + 1]
    return frozenset((j, nxt) for j in graph.in_neighbors(nxt))


def _reaches(graph, profile, start, goal, banned) -> bool:
    if start == goal:
        return True
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        report = profile.get(u)
        if report is None:
            continue
        for v in report.diffusion:
            if v == goal:
                return True
            if v not in seen and v not in banned and profile.get(v) is not None:
                seen.add(v)
                stack.append(v)
    return False


def alpha_beta(graph: Graph, profile, seq: CriticalSequence, k: int) -> EdgeCut:
    """Minimum set of the current node's out-edges that blocks the next critical node.

    Edge ``(i, j)`` is cut exactly when the next critical node is reachable
    from ``j`` without passing back through ``i`` (or the seller).
    """
    _check_position(seq, k)
    i, nxt = seq[k], seq[k + 1]
    report = profile.get(i)
    if report is None:
        return frozenset()
    banned = {i, graph.seller}
    return frozenset((i, j) for j in report.diffusion
                     if j != graph.seller and _reaches(graph, profile, j, nxt, banned))


@dataclass(frozen=True)
class CutStrategy:
    """A named alpha rule.  ``compute`` returns the empty cut at the last position."""

    name: str
    rule: Callable[[Graph, object, CriticalSequence, int], EdgeCut]

    def compute(self, graph: Graph, profile, seq: CriticalSequence, k: int) -> EdgeCut:
        if k == len(seq) - 1:
            return frozenset()
        return self.rule(graph, profile, seq, k)


IDM = CutStrategy("idm", alpha_idm)
BETA = CutStrategy("beta", alpha_beta)
STRATEGIES: dict[str, CutStrategy] = {"idm": IDM, "beta": BETA}


def register_strategy(strategy: CutStrategy) -> None:
    STRATEGIES[strategy.name] = strategy


def highest_bidder(graph: Graph, profile) -> Optional[Node]:
    bidders = [i for i in informed_set(graph, profile) if profile[i].bid is not None]
    if not bidders:
        return None
    return min(bidders, key=lambda i: (-profile[i].bid, i))


# -- validation of the three alpha properties -------------------------------

@dataclass(frozen=True)
class Counterexample:
    property: int  # 1 blocking, 2 node independence, 3 diffusion monotonicity
    instance: int
    position: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    strategy: str
    instances: int
    positions: int
    counterexample: Optional[Counterexample] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None


PROPERTY_NAMES = {1: "information blocking", 2: "node independence", 3: "diffusion monotonicity"}


def _perturbations(graph, profile, nodes, rng):
    """Reports of ``nodes`` rewritten: every subset emptied when small, else random rewrites."""
    nodes = sorted(nodes)
    if len(nodes) <= 4:
        for size in range(1, len(nodes) + 1):
            for subset in itertools.combinations(nodes, size):
                reports = dict(profile)
                for n in subset:
                    old = profile.get(n)
                    bid = (old.bid + 1) if old is not None and old.bid is not None else 0
                    reports[n] = Report(bid, frozenset())
                yield ReportedProfile(reports)
        return
    for _ in range(64):
        reports = dict(profile)
        for n in nodes:
            if rng.random() < 0.25:
                reports[n] = None
                continue
            nbrs = sorted(graph.neighbors(n))
            diff = frozenset(v for v in nbrs if rng.random() < 0.5)
            reports[n] = Report(Fraction(rng.randint(0, 20)), diff)
        yield ReportedProfile(reports)


def validate_cut_strategy(strategy: CutStrategy, corpus: Iterable[tuple[Graph, object]],
                          seed: int = 0) -> ValidationReport:
    """Check blocking, node independence and diffusion monotonicity on every
    non-terminal position of the highest bidder's critical sequence."""
    rng = random.Random(seed)
    instances = positions = 0
    for idx, (graph, profile) in enumerate(corpus):
        instances += 1
        m = highest_bidder(graph, profile)
        if m is None:
            continue
        seq = critical_sequence(graph, profile, m)
        for k in range(len(seq) - 1):
            positions += 1
            i, nxt = seq[k], seq[k + 1]
            cut = strategy.compute(graph, profile, seq, k)

            after = restrict(graph, profile, RemovalSpec.of_edges(cut))
            if nxt in informed_set(graph, after):
                return ValidationReport(strategy.name, instances, positions, Counterexample(
                    1, idx, k, f"{nxt} still informed after removing {sorted(cut)}"))

            d_next = dependents(graph, profile, nxt)
            for other in _perturbations(graph, profile, d_next, rng):
                if strategy.compute(graph, other, seq, k) != cut:
                    return ValidationReport(strategy.name, instances, positions, Counterexample(
                        2, idx, k, f"cut at {i} changed when reports in {sorted(d_next)} changed"))

            own = profile[i]
            nbrs = sorted(graph.neighbors(i))
            subsets = [frozenset(c) for r in range(len(nbrs) + 1)
                       for c in itertools.combinations(nbrs, r)]
            silenced = {}
            for sub in subsets:
                p = profile.replace(i, Report(own.bid, sub))
                c = strategy.compute(graph, p, seq, k)
                silenced[sub] = informed_set(graph, restrict(graph, p, RemovalSpec.of_edges(c)))
            for small in subsets:
                for big in subsets:
                    if small < big and not silenced[small] <= silenced[big]:
                        return ValidationReport(strategy.name, instances, positions, Counterexample(
                            3, idx, k, f"{i} diffusing {sorted(small)} informs nodes that "
                                       f"{sorted(big)} does not"))
    return ValidationReport(strategy.name, instances, positions)
