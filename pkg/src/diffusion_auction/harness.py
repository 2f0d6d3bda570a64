"""Exhaustive desk-scale checks of the mechanisms' guarantees.

Each ``check_*`` function inspects one graph and returns a
:class:`PropertyReport`; :func:`run_suites` applies them to a seeded random
corpus and merges the reports.  All comparisons are exact.

Conventions:

* IC is checked with every other node truthful, plus random opponent
  profiles as spot checks.  A deviation is a bid from the grid (or no bid)
  combined with any subset of the node's true neighbours.
* An instance whose mechanism run meets two equal efficient-allocation
  scores in any market it queries is *tie-flagged*; gains found on flagged
  instances are reported separately and do not fail the IC property.
* ``max_gain`` is the largest signed shortfall of the property (utility
  gain for IC, negative utility for IR, baseline minus mechanism for
  dominance, ...).  A property passes when nothing is positive.
"""
from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from . import graph as _graph
from .critical import BETA, IDM, CutStrategy, critical_sequence, highest_bidder
from .generate import GenConfig, gen_random
from .graph import (Graph, Node, RemovalSpec, Report, ReportedProfile, TradingPath,
                    WelfareResult, efficient_allocation, format_rational, informed_set,
                    restrict, shortest_trading_path, welfare)
from .mechanisms import (MECHANISMS, AuctionOutcome, EmptyMarket, cdm, vickrey, wdm,
                         wdm_with_context)

DEFAULT_DEGREE_CAP = 10
BRUTE_FORCE_LIMIT = 10


class DegreeTooLarge(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Deviation:
    node: Node
    bid: Optional[Fraction]
    diffusion: frozenset[Node]

    def report(self) -> Report:
        return Report(self.bid, self.diffusion)

    def __str__(self):
        bid = "nil" if self.bid is None else format_rational(self.bid)
        return f"{self.node}:(bid={bid}, diffuse={sorted(self.diffusion)})"


@dataclass
class Violation:
    instance: str
    node: Optional[Node]
    deviation: Optional[Deviation]
    gain: Fraction
    detail: str = ""

    def to_json(self):
        return {"instance": self.instance, "node": self.node,
                "deviation": str(self.deviation) if self.deviation else None,
                "gain": format_rational(self.gain), "detail": self.detail}


@dataclass
class PropertyReport:
    property: str
    instances_checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    max_gain: Optional[Fraction] = None
    flagged_instances: int = 0
    flagged_violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and (self.max_gain is None or self.max_gain <= 0)

    def observe(self, gain: Fraction) -> None:
        if self.max_gain is None or gain > self.max_gain:
            self.max_gain = gain

    def merge(self, other: "PropertyReport") -> "PropertyReport":
        out = PropertyReport(self.property, self.instances_checked + other.instances_checked,
                             self.violations + other.violations, self.max_gain,
                             self.flagged_instances + other.flagged_instances,
                             self.flagged_violations + other.flagged_violations)
        if other.max_gain is not None:
            out.observe(other.max_gain)
        return out

    def summary(self) -> str:
        gain = "n/a" if self.max_gain is None else format_rational(self.max_gain)
        line = (f"{'PASS' if self.passed else 'FAIL'} {self.property}: "
                f"{self.instances_checked} instances, {len(self.violations)} violations, max gain {gain}")
        if self.flagged_instances:
            line += (f" ({self.flagged_instances} tie-flagged instances excluded, "
                     f"{len(self.flagged_violations)} gains there)")
        return line

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "passed": self.passed,
            "instances_checked": self.instances_checked,
            "violations": [v.to_json() for v in self.violations],
            "max_gain": None if self.max_gain is None else format_rational(self.max_gain),
            "flagged_instances": self.flagged_instances,
            "flagged_violations": [v.to_json() for v in self.flagged_violations],
        }


# -- deviations and utilities -----------------------------------------------

def degree_cap() -> int:
    return int(os.environ.get("AUCTION_DEGREE_CAP", DEFAULT_DEGREE_CAP))


def default_bid_grid(graph: Graph) -> list[Fraction]:
    """Every true value and its neighbours at distance 1, plus 0 and max value + 1."""
    grid = {Fraction(0)}
    for v in graph.values.values():
        grid.update((v - 1, v, v + 1))
    if graph.values:
        grid.add(max(graph.values.values()) + 1)
    return sorted(x for x in grid if x >= 0)


def _subsets(items) -> list[frozenset]:
    items = sorted(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def deviation_space(graph: Graph, node: Node, bid_grid: Sequence[Fraction],
                    cap: Optional[int] = None) -> list[Deviation]:
    """(grid + {nil}) x all subsets of the node's true neighbours."""
    cap = degree_cap() if cap is None else cap
    nbrs = graph.neighbors(node)
    if len(nbrs) > cap:
        raise DegreeTooLarge(f"{node} has {len(nbrs)} neighbours (cap {cap})")
    bids = list(dict.fromkeys(list(bid_grid) + [None]))
    return [Deviation(node, b, sub) for b in bids for sub in _subsets(nbrs)]


def outcome_or_none(mechanism, graph, profile) -> Optional[AuctionOutcome]:
    try:
        return mechanism(graph, profile)
    except EmptyMarket:
        return None


def utility(mechanism, graph: Graph, profile, node: Node) -> Fraction:
    """True-value utility of ``node``; an empty market gives everyone zero."""
    outcome = outcome_or_none(mechanism, graph, profile)
    if outcome is None:
        return Fraction(0)
    return outcome.utility(node, graph.values[node])


def _has_tie(scores: dict) -> bool:
    # Only a shared maximum lets the tie-break decide a winner or a W* value.
    if len(scores) < 2:
        return False
    top = max(scores.values())
    return sum(1 for v in scores.values() if v == top) > 1


def tie_flagged(mechanism, graph: Graph, profile) -> bool:
    """True when two nodes share the best score in some market the mechanism evaluates."""
    log: list = []
    token = _graph._TIE_LOG.set(log)
    try:
        outcome_or_none(mechanism, graph, profile)
    finally:
        _graph._TIE_LOG.reset(token)
    return any(_has_tie(scores) for scores in log)


def _name(mechanism) -> str:
    for key, value in MECHANISMS.items():
        if value is mechanism:
            return key
    return getattr(mechanism, "__name__", repr(mechanism))


# -- property checks ----------------------------------------------------------

def _ic_scan(report, mechanism, graph, base, nodes, grid, instance, flagged):
    for i in nodes:
        truth = utility(mechanism, graph, base.replace(i, Report(graph.values[i], graph.neighbors(i))), i)
        for dev in deviation_space(graph, i, grid):
            gain = utility(mechanism, graph, base.replace(i, dev.report()), i) - truth
            if not flagged:
                report.observe(gain)
            if gain > 0:
                v = Violation(instance, i, dev, gain)
                (report.flagged_violations if flagged else report.violations).append(v)


def random_opponents(graph: Graph, rng: random.Random, grid: Sequence[Fraction]) -> ReportedProfile:
    reports = {}
    for j in graph.nodes:
        if rng.random() < 0.125:
            reports[j] = None
            continue
        nbrs = sorted(graph.neighbors(j))
        reports[j] = Report(rng.choice(grid), frozenset(v for v in nbrs if rng.random() < 0.75))
    return ReportedProfile(reports)


def check_ic(mechanism, graph: Graph, bid_grid: Optional[Sequence[Fraction]] = None, *,
             opponent_perturbations: int = 0, seed: int = 0, instance: str = "") -> PropertyReport:
    """Largest utility gain from any unilateral deviation (opponents truthful).

    With ``opponent_perturbations`` > 0, additionally draws that many random
    opponent profiles and scans the full deviation space of one random node
    against each.
    """
    grid = default_bid_grid(graph) if bid_grid is None else list(bid_grid)
    report = PropertyReport(f"ic:{_name(mechanism)}")
    truthful = graph.truthful_profile()
    flagged = tie_flagged(mechanism, graph, truthful)
    _ic_scan(report, mechanism, graph, truthful, graph.nodes, grid, instance, flagged)
    rng = random.Random(seed)
    for k in range(opponent_perturbations if graph.nodes else 0):
        i = rng.choice(graph.nodes)
        base = random_opponents(graph, rng, grid).replace(i, Report(graph.values[i], graph.neighbors(i)))
        spot_flag = flagged or tie_flagged(mechanism, graph, base)
        _ic_scan(report, mechanism, graph, base, [i], grid, f"{instance}#opp{k}", spot_flag)
    report.instances_checked = 0 if flagged else 1
    report.flagged_instances = 1 if flagged else 0
    return report


def check_ir(mechanism, graph: Graph, instance: str = "") -> PropertyReport:
    """Truthful bid with every diffusion subset never yields negative utility."""
    report = PropertyReport(f"ir:{_name(mechanism)}", instances_checked=1)
    truthful = graph.truthful_profile()
    for i in graph.nodes:
        for sub in _subsets(graph.neighbors(i)):
            u = utility(mechanism, graph, truthful.replace(i, Report(graph.values[i], sub)), i)
            report.observe(-u)
            if u < 0:
                report.violations.append(Violation(instance, i, Deviation(i, graph.values[i], sub), -u))
    return report


def check_dominance(mechanism, graph: Graph, instance: str = "") -> PropertyReport:
    """Revenue and welfare at truthful reports are at least Vickrey's."""
    report = PropertyReport(f"dominance:{_name(mechanism)}", instances_checked=1)
    truthful = graph.truthful_profile()
    base = outcome_or_none(vickrey, graph, truthful)
    mine = outcome_or_none(mechanism, graph, truthful)
    if base is None and mine is None:
        return report
    for what in ("revenue", "welfare"):
        theirs = getattr(base, what) if base is not None else Fraction(0)
        ours = getattr(mine, what) if mine is not None else Fraction(0)
        report.observe(theirs - ours)
        if ours < theirs:
            report.violations.append(Violation(instance, None, None, theirs - ours,
                                               f"{what} {ours} < vickrey {theirs}"))
    return report


def first_critical_floor(graph: Graph, profile=None) -> Fraction:
    """``W*`` once the first critical node of the highest bidder is removed."""
    profile = graph.truthful_profile() if profile is None else profile
    m = highest_bidder(graph, profile)
    if m is None:
        return Fraction(0)
    s1 = critical_sequence(graph, profile, m)[0]
    return welfare(graph, profile, RemovalSpec.of_nodes(s1))


def check_idm_floor(graph: Graph, strategies: Iterable[CutStrategy] = (BETA,),
                    instance: str = "") -> PropertyReport:
    """Every CDM earns at least the IDM revenue, which equals ``W*`` without the first critical node."""
    report = PropertyReport("floor", instances_checked=1)
    truthful = graph.truthful_profile()
    idm_rev = cdm(graph, truthful, IDM).revenue
    floor = first_critical_floor(graph, truthful)
    report.observe(abs(idm_rev - floor))
    if idm_rev != floor:
        report.violations.append(Violation(instance, None, None, abs(idm_rev - floor),
                                           f"cdm-idm revenue {idm_rev} != W*(t_-s1) {floor}"))
    for strategy in strategies:
        rev = cdm(graph, truthful, strategy).revenue
        report.observe(idm_rev - rev)
        if rev < idm_rev:
            report.violations.append(Violation(instance, None, None, idm_rev - rev,
                                               f"cdm-{strategy.name} revenue {rev} < cdm-idm {idm_rev}"))
    return report


def zero_payment_nodes(graph: Graph, profile=None, close_path: bool = False) -> tuple[AuctionOutcome, list[Node]]:
    """WDM outcome and the path nodes whose cut market's efficient path meets the part of
    the efficient path beyond them."""
    profile = graph.truthful_profile() if profile is None else profile
    outcome, ctx = wdm_with_context(graph, profile, close_path)
    path = ctx.efficient_path.nodes
    g = outcome.winner
    applicable = []
    for k, i in enumerate(path[:path.index(g)]):
        cut = efficient_allocation(graph, ctx.cut_market(graph, profile, i))
        if cut.path is not None and set(cut.path.nodes) & set(path[k + 1:]):
            applicable.append(i)
    return outcome, applicable


def check_zero_payment(graph: Graph, instance: str = "", close_path: bool = False) -> PropertyReport:
    report = PropertyReport("zero-payment", instances_checked=1)
    outcome, applicable = zero_payment_nodes(graph, close_path=close_path)
    for i in applicable:
        x = outcome.payment(i)
        report.observe(abs(x))
        if x != 0:
            report.violations.append(Violation(instance, i, None, abs(x), f"x_{i} = {x}"))
    return report


def check_degeneracy(graph: Graph, instance: str = "") -> PropertyReport:
    """Zero weights: the WDM winner is critical for the highest bidder and revenue >= W*(t_-s1)."""
    report = PropertyReport("degeneracy", instances_checked=1)
    truthful = graph.truthful_profile()
    outcome = wdm(graph, truthful)
    seq = critical_sequence(graph, truthful, highest_bidder(graph, truthful))
    if outcome.winner not in seq.sequence:
        report.violations.append(Violation(instance, outcome.winner, None, Fraction(0),
                                           f"winner outside critical sequence {seq.sequence}"))
    floor = first_critical_floor(graph, truthful)
    report.observe(floor - outcome.revenue)
    if outcome.revenue < floor:
        report.violations.append(Violation(instance, None, None, floor - outcome.revenue,
                                           f"revenue {outcome.revenue} < W*(t_-s1) {floor}"))
    return report


# -- brute-force oracle ------------------------------------------------------

def _reachable(graph, profile):
    seen, stack = set(), [a for a in graph.neighbors(graph.seller) if profile.get(a) is not None]
    seen.update(stack)
    while stack:
        u = stack.pop()
        for v in profile[u].diffusion:
            if v != graph.seller and v not in seen and profile.get(v) is not None:
                seen.add(v)
                stack.append(v)
    return seen


def enumerate_trading_paths(graph: Graph, profile) -> Iterable[tuple[Node, ...]]:
    """Every simple trading path, by depth-first search from each seller neighbour."""
    def extend(path, on_path):
        yield tuple(path)
        for v in sorted(profile[path[-1]].diffusion):
            if v != graph.seller and v not in on_path and profile.get(v) is not None:
                path.append(v)
                on_path.add(v)
                yield from extend(path, on_path)
                path.pop()
                on_path.discard(v)

    for a in sorted(graph.neighbors(graph.seller)):
        if profile.get(a) is not None:
            yield from extend([a], {a})


def path_weight(graph: Graph, nodes: Sequence[Node]) -> Fraction:
    return sum((graph.weights[(u, v)] for u, v in zip(nodes, nodes[1:])), Fraction(0))


def brute_force_paths(graph: Graph, profile) -> dict[Node, TradingPath]:
    """Minimum (weight, hop count, sequence) trading path to every reachable node."""
    if len(_reachable(graph, profile)) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"more than {BRUTE_FORCE_LIMIT} informed nodes")
    best: dict[Node, tuple] = {}
    for nodes in enumerate_trading_paths(graph, profile):
        key = (path_weight(graph, nodes), len(nodes), nodes)
        if nodes[-1] not in best or key < best[nodes[-1]]:
            best[nodes[-1]] = key
    return {n: TradingPath(seq, w) for n, (w, _, seq) in best.items()}


def brute_force_welfare(graph: Graph, profile) -> WelfareResult:
    paths = brute_force_paths(graph, profile)
    candidates = [(-(profile[n].bid - p.weight), n) for n, p in paths.items() if profile[n].bid is not None]
    if not candidates:
        return WelfareResult(None, Fraction(0), None)
    neg, winner = min(candidates)
    return WelfareResult(winner, -neg, paths[winner])


def check_oracle(graph: Graph, instance: str = "") -> PropertyReport:
    """Shortest paths and the efficient allocation agree with path enumeration,
    at the truthful profile and after removing each single node."""
    report = PropertyReport("oracle", instances_checked=1)
    truthful = graph.truthful_profile()
    profiles = [truthful] + [restrict(graph, truthful, RemovalSpec.of_nodes(n)) for n in graph.nodes]
    for profile in profiles:
        expected = brute_force_welfare(graph, profile)
        got = efficient_allocation(graph, profile)
        if got != expected:
            report.violations.append(Violation(instance, None, None, Fraction(0),
                                               f"efficient allocation {got} != oracle {expected}"))
        paths = brute_force_paths(graph, profile)
        for target in graph.nodes:
            if shortest_trading_path(graph, profile, target) != paths.get(target):
                report.violations.append(Violation(instance, target, None, Fraction(0),
                                                   f"shortest path to {target} disagrees with oracle"))
    return report


# -- corpus runner -------------------------------------------------------------

SUITES = ("ic", "ir", "dominance", "floor", "oracle", "zero-payment", "degeneracy")
DIFFUSION_MECHANISMS = ("cdm-idm", "cdm-beta", "wdm")


def corpus(n: int = 5, seeds: int = 500, seed_base: int = 0, edge_prob="1/2",
           value_max: int = 10, weight_max: int = 5) -> list[tuple[str, Graph]]:
    return [(f"seed-{seed_base + k:06d}",
             gen_random(GenConfig(n=n, edge_prob=edge_prob, value_max=value_max,
                                  weight_max=weight_max, seed=seed_base + k)))
            for k in range(seeds)]


def _instance_reports(args) -> list[PropertyReport]:
    instance, graph, suites, opponent_perturbations = args
    flat = graph.zero_weights()
    # CDM is only defined on zero weights; WDM runs on the weighted graph.
    targets = {"cdm-idm": flat, "cdm-beta": flat, "wdm": graph}
    seed = int.from_bytes(instance.encode(), "little") % (2 ** 32)
    out = []
    for suite in suites:
        if suite in ("ic", "ir", "dominance"):
            for name in DIFFUSION_MECHANISMS:
                mech, g = MECHANISMS[name], targets[name]
                if suite == "ic":
                    out.append(check_ic(mech, g, opponent_perturbations=opponent_perturbations,
                                        seed=seed, instance=instance))
                elif suite == "ir":
                    out.append(check_ir(mech, g, instance))
                else:
                    out.append(check_dominance(mech, g, instance))
        elif suite == "floor":
            out.append(check_idm_floor(flat, (BETA,), instance))
        elif suite == "oracle":
            out.append(check_oracle(graph, instance).merge(check_oracle(flat, instance)))
        elif suite == "zero-payment":
            out.append(check_zero_payment(graph, instance))
        elif suite == "degeneracy":
            out.append(check_degeneracy(flat, instance))
        else:
            raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    return out


def run_suites(suites: Sequence[str], instances: Sequence[tuple[str, Graph]], *,
               opponent_perturbations: int = 4, jobs: int = 1,
               progress: Optional[Callable[[int], None]] = None) -> dict[str, PropertyReport]:
    """Run ``suites`` over ``instances``; returns one merged report per property."""
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}; choose from {SUITES}")
    work = [(iid, g, tuple(suites), opponent_perturbations) for iid, g in sorted(instances, key=lambda t: t[0])]
    merged: dict[str, PropertyReport] = {}
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = pool.map(_instance_reports, work, chunksize=4)
            for k, reports in enumerate(results):
                _merge_into(merged, reports)
                if progress:
                    progress(k + 1)
    else:
        for k, item in enumerate(work):
            _merge_into(merged, _instance_reports(item))
            if progress:
                progress(k + 1)
    return merged


def _merge_into(merged, reports):
    for r in reports:
        merged[r.property] = merged[r.property].merge(r) if r.property in merged else r
