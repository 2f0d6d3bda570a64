"""Check the bundled eight-buyer example against every known fact about it,
then sweep each free edge weight to show which values keep all facts true.

    python3 scripts/fig1_constraints.py
"""
from __future__ import annotations

from fractions import Fraction

from diffusion_auction.critical import BETA, IDM, alpha_beta, critical_sequence, dependents
from diffusion_auction.graph import Graph, RemovalSpec, efficient_allocation, restrict
from diffusion_auction.harness import brute_force_welfare
from diffusion_auction.io import graph_to_dict, load_fixture
from diffusion_auction.mechanisms import (cdm, efficient_winner, intermediaries, reduced_distance,
                                          vickrey, wdm_with_context)

# Edge weights fixed by the example's arithmetic; the rest are free.
PINNED = {("B", "E"), ("E", "F"), ("B", "D"), ("D", "F")}
SWEEP = range(0, 6)


def facts(g: Graph) -> dict[str, bool]:
    t = g.truthful_profile()
    flat = g.zero_weights()
    ft = flat.truthful_profile()
    out = {}
    out["vickrey revenue 1"] = vickrey(g, t).revenue == 1
    out["C*_G = (B,F,G)"] = critical_sequence(g, t, "G").sequence == ("B", "F", "G")
    out["C*_F = (B,F)"] = critical_sequence(g, t, "F").sequence == ("B", "F")
    out["d_F = {F,G,H}"] = dependents(g, t, "F") == {"F", "G", "H"}
    cut = restrict(g, t, RemovalSpec.of_edges([("B", "D"), ("B", "E")]))
    out["cutting (B,D),(B,E) leaves {A,B,C}"] = set(cut.non_nil()) == {"A", "B", "C"}
    seq = critical_sequence(g, t, "G")
    out["beta_B = {(B,D),(B,E)}"] = alpha_beta(g, t, seq, 0) == {("B", "D"), ("B", "E")}
    out["beta_F = {(F,G),(F,H)}"] = alpha_beta(g, t, seq, 1) == {("F", "G"), ("F", "H")}
    beta = cdm(flat, ft, BETA)
    out["cdm-beta: F wins, x_B=-3, x_F=6"] = (beta.winner, beta.payment("B"), beta.payment("F")) == ("F", -3, 6)
    out["cdm-idm revenue 1"] = cdm(flat, ft, IDM).revenue == 1
    out["I_B = {A,D,E}"] = intermediaries(g, t, "B") == {"A", "D", "E"}
    eff = efficient_allocation(g, t)
    out["efficient path (B,E,F)"] = eff.path is not None and eff.path.nodes == ("B", "E", "F")
    out["oracle agrees"] = brute_force_welfare(g, t) == eff
    o, ctx = wdm_with_context(g, t)
    out["gamma_E = {(E,B),(E,F)}"] = ctx.gamma_cuts.get("E") == {("E", "B"), ("E", "F")}
    out["C wins B's cut market"] = efficient_winner(g, ctx.cut_market(g, t, "B")) == "C"
    out["wdm: F wins, x_B=-2, x_E=0, x_F=9"] = (o.winner, o.payment("B"), o.payment("E"), o.payment("F")) == ("F", -2, 0, 9)
    out["secondary nodes {E}"] = ctx.secondary_nodes == {"E"}
    out["w~(E,F) = 3"] = o.winner == "F" and reduced_distance(g, t, ctx, "E", "F") == 3
    out["W*(t_-F) + w~(F,F) = 6"] = (o.winner == "F" and
                                     efficient_allocation(g, restrict(g, t, RemovalSpec.of_nodes("F"))).welfare
                                     + reduced_distance(g, t, ctx, "F", "F") == 6)
    return out


def holds(g: Graph) -> bool:
    try:
        return all(facts(g).values())
    except Exception:  # a reweighting can make some query undefined; that counts as a miss
        return False


def main() -> None:
    g = load_fixture("fig1")
    results = facts(g)
    for name, ok in results.items():
        print(f"{'ok ' if ok else 'BAD'} {name}")
    print(f"{sum(results.values())}/{len(results)} facts hold\n")

    doc = graph_to_dict(g)
    print("edge      fixture  weights keeping every fact")
    for u, v, w in g.edges:
        if u == g.seller or (u, v) in PINNED:
            continue
        good = []
        for alt in SWEEP:
            edges = [(a, b, Fraction(alt) if (a, b) == (u, v) else x) for a, b, x in g.edges]
            try:
                h = Graph(doc["seller"], g.values, edges)
            except ValueError:
                continue
            if holds(h):
                good.append(alt)
        print(f"({u},{v})    {str(w):>7}  {good}")


if __name__ == "__main__":
    main()
