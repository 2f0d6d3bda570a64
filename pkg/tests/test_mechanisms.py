from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graphs, random_profile, star
from diffusion_auction.critical import IDM, critical_sequence, highest_bidder
from diffusion_auction.harness import check_zero_payment
from diffusion_auction.graph import (Graph, RemovalSpec, Report, efficient_allocation,
                                     efficient_winner, welfare)
from diffusion_auction.mechanisms import (BETA, MECHANISMS, EmptyMarket, WeightedGraph, cdm, gamma,
                                          get_mechanism, intermediaries, reduced_distance, vickrey,
                                          wdm, wdm_allocate, wdm_with_context)


# -- Vickrey ------------------------------------------------------------------

def test_vickrey_fig1(fig1):
    o = vickrey(fig1, fig1.truthful_profile())
    assert (o.winner, o.revenue, o.welfare) == ("B", 1, 2)


def test_vickrey_single_neighbour_pays_zero():
    o = vickrey(star({"A": 5}), star({"A": 5}).truthful_profile())
    assert o.winner == "A" and o.payment("A") == 0


def test_vickrey_tie():
    g = star({"A": 3, "B": 3})
    o = vickrey(g, g.truthful_profile())
    assert o.winner == "A" and o.payment("A") == 3


# -- CDM ----------------------------------------------------------------------

def test_cdm_beta_fig1(fig1_flat):
    o = cdm(fig1_flat, fig1_flat.truthful_profile(), BETA)
    assert o.winner == "F"
    assert o.payments == {"B": Fraction(-3), "F": Fraction(6)}
    assert o.revenue == 3


def test_cdm_idm_fig1_earns_removal_welfare(fig1_flat):
    t = fig1_flat.truthful_profile()
    o = cdm(fig1_flat, t, IDM)
    assert o.revenue == welfare(fig1_flat, t, RemovalSpec.of_nodes("B")) == 1


def test_cdm_star_coincides_with_vickrey():
    g = star({"A": 7, "B": 4})
    for strategy in (IDM, BETA):
        o = cdm(g, g.truthful_profile(), strategy)
        assert o.winner == "A" and o.payment("A") == 4 and o.revenue == 4


def test_cdm_rejects_weighted_graphs(fig1):
    with pytest.raises(WeightedGraph):
        cdm(fig1, fig1.truthful_profile())


def test_empty_market():
    g = Graph("s", {"A": 1}, [])
    for name, mech in MECHANISMS.items():
        with pytest.raises(EmptyMarket):
            mech(g, g.truthful_profile())


@given(random_graphs(max_n=5, negative=False), st.integers(0, 10 ** 6))
def test_cdm_winner_lies_on_highest_bidder_sequence(graph, seed):
    flat = graph.zero_weights()
    t = random_profile(flat, seed, nil_rate=0)
    m = highest_bidder(flat, t)
    if m is None:
        return
    seq = critical_sequence(flat, t, m).sequence
    for mech in (MECHANISMS["cdm-idm"], MECHANISMS["cdm-beta"]):
        o = mech(flat, t)
        assert o.winner in seq
        assert set(o.payments) == set(seq[:seq.index(o.winner) + 1])


# -- WDM ----------------------------------------------------------------------

def test_intermediaries_fig1(fig1):
    t = fig1.truthful_profile()
    assert intermediaries(fig1, t, "B") == {"A", "D", "E"}
    assert intermediaries(fig1, t, "G") == frozenset()


def test_gamma_fig1(fig1):
    t = fig1.truthful_profile()
    path = efficient_allocation(fig1, t).path
    assert gamma(fig1, t, path, 0) == {("B", "A"), ("B", "D"), ("B", "E")}
    assert gamma(fig1, t, path, 1) == {("E", "B"), ("E", "F")}
    assert gamma(fig1, t, path, 2) == frozenset()


def test_wdm_allocation_walk_fig1(fig1):
    t = fig1.truthful_profile()
    g, path, ctx = wdm_allocate(fig1, t)
    assert efficient_winner(fig1, ctx.cut_market(fig1, t, "B")) == "C"
    assert efficient_winner(fig1, ctx.cut_market(fig1, t, "E")) != "E"
    assert g == "F" and path.nodes == ("B", "E", "F")


def test_reduced_distances_fig1(fig1):
    t = fig1.truthful_profile()
    outcome, ctx = wdm_with_context(fig1, t)
    assert reduced_distance(fig1, t, ctx, "E", "E") == 0
    assert reduced_distance(fig1, t, ctx, "E", "F") == 3
    assert reduced_distance(fig1, t, ctx, "F", "F") == 0
    assert ctx.secondary_nodes == {"E"}
    assert ctx.critical_value == 9


def test_wdm_fig1(fig1):
    o = wdm(fig1, fig1.truthful_profile())
    assert o.winner == "F" and o.path.nodes == ("B", "E", "F")
    assert o.payments == {"B": Fraction(-2), "E": Fraction(0), "F": Fraction(9)}
    assert o.revenue == 7 and o.welfare == 10
    assert o.utility("F", fig1.values["F"]) == fig1.values["F"] - 9


def test_wdm_single_bidder():
    g = star({"A": 5})
    o = wdm(g, g.truthful_profile())
    assert o.winner == "A" and o.payment("A") == 0


def test_wdm_star_pays_second_bid():
    g = star({"A": 7, "B": 4})
    o = wdm(g, g.truthful_profile())
    assert o.winner == "A" and o.payment("A") == 4


def test_no_secondary_means_removal_fallback():
    # s -> A -> B, A=9 beats B=3: A wins, no prefix, pays W*(t_-A) = 0.
    g = Graph("s", {"A": 9, "B": 3}, [("s", "A", 0), ("A", "B", 1)])
    t = g.truthful_profile()
    o, ctx = wdm_with_context(g, t)
    assert o.winner == "A" and ctx.secondary_nodes == frozenset()
    assert o.payment("A") == welfare(g, t, RemovalSpec.of_nodes("A")) + reduced_distance(g, t, ctx, "A", "A")


@given(random_graphs(max_n=5), st.integers(0, 10 ** 6))
def test_secondary_nodes_exist_only_when_winner_is_efficient(graph, seed):
    t = random_profile(graph, seed, nil_rate=0)
    try:
        o, ctx = wdm_with_context(graph, t)
    except EmptyMarket:
        return
    if o.winner != efficient_allocation(graph, t).winner:
        assert ctx.secondary_nodes == frozenset()


@given(random_graphs(max_n=5))
def test_secondary_nodes_match_definition(graph):
    t = graph.truthful_profile()
    try:
        o, ctx = wdm_with_context(graph, t)
    except EmptyMarket:
        return
    g = o.winner
    expected = set()
    for i in ctx.efficient_path.nodes[:ctx.efficient_path.nodes.index(g)]:
        market = ctx.cut_market(graph, t, i)
        if market.get(g) is not None:
            market = market.replace(g, Report(None, market[g].diffusion))
        if efficient_winner(graph, market) == i:
            expected.add(i)
    assert ctx.secondary_nodes == expected


@given(random_graphs(max_n=5, negative=False))
def test_zero_weight_wdm_earns_at_least_idm(graph):
    flat = graph.zero_weights()
    t = flat.truthful_profile()
    try:
        assert wdm(flat, t).revenue >= cdm(flat, t, IDM).revenue
    except EmptyMarket:
        pass


def test_outcome_json(fig1):
    doc = wdm(fig1, fig1.truthful_profile()).to_json()
    assert doc == {"mechanism": "wdm", "winner": "F", "path": ["B", "E", "F"],
                   "payments": {"B": "-2", "E": "0", "F": "9"}, "revenue": "7", "welfare": "10"}


def test_get_mechanism():
    assert get_mechanism("wdm") is wdm
    with pytest.raises(KeyError):
        get_mechanism("vcg")


# -- open cut at the last path node -------------------------------------------

def leaf_detour() -> Graph:
    """F is the only seller neighbour; A (value 10) is reachable from F directly
    (weight 2) or via E, B (weight 1).  A's only out-neighbour is F, so A is not
    an intermediary of F and the plain cut of F keeps the arc (F, A)."""
    return Graph("s", {"A": 10, "B": 4, "C": 4, "D": 4, "E": 1, "F": 4}, [
        ("A", "F", 1), ("B", "A", 1), ("B", "D", 3), ("B", "F", 1), ("D", "B", 1), ("D", "C", 1),
        ("D", "F", 1), ("E", "B", 0), ("E", "C", 2), ("F", "A", 2), ("F", "E", 0), ("s", "F", 0)])


def test_plain_cut_leaves_arc_to_last_path_node():
    g = leaf_detour()
    t = g.truthful_profile()
    o, ctx = wdm_with_context(g, t)
    assert ctx.efficient_path.nodes == ("F", "E", "B", "A")
    assert ctx.gamma_cuts["F"] == {("F", "E")}
    # A still wins F's cut market through (F, A), so F is paid 8 and revenue drops below Vickrey.
    assert o.payments == {"F": Fraction(-8), "E": Fraction(0), "B": Fraction(0), "A": Fraction(6)}
    assert o.revenue == -3 < vickrey(g, t).revenue == 0


def test_closed_cut_repairs_leaf_detour():
    g = leaf_detour()
    t = g.truthful_profile()
    o = MECHANISMS["wdm-closed"](g, t)
    assert o.winner == "F" and o.revenue == vickrey(g, t).revenue == 0
    assert check_zero_payment(g, close_path=True).passed
    assert not check_zero_payment(g).passed


def test_closed_cut_matches_plain_on_fixture(fig1):
    t = fig1.truthful_profile()
    assert MECHANISMS["wdm-closed"](fig1, t).payments == wdm(fig1, t).payments


@given(random_graphs(max_n=5))
def test_closed_cut_keeps_dominance_and_zero_payments(graph):
    t = graph.truthful_profile()
    try:
        o = MECHANISMS["wdm-closed"](graph, t)
    except EmptyMarket:
        return
    assert o.revenue >= vickrey(graph, t).revenue
    assert check_zero_payment(graph, close_path=True).passed
