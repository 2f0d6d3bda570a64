"""Seeded random instances for benchmarks and verification corpora."""
from __future__ import annotations

import random
import string
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .graph import Graph, rational


@dataclass(frozen=True)
class GenConfig:
    n: int = 5
    edge_prob: Union[Fraction, str, int] = Fraction(1, 2)
    value_max: int = 10
    weight_max: int = 5
    seed: int = 0
    allow_negative_weights: bool = False

    def __post_init__(self):
        p = rational(self.edge_prob)
        object.__setattr__(self, "edge_prob", p)
        if not 0 <= p <= 1:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.n < 0 or self.value_max < 1 or self.weight_max < 0:
            raise ValueError("n >= 0, value_max >= 1 and weight_max >= 0 are required")


def node_names(n: int) -> list[str]:
    if n <= 26:
        return list(string.ascii_uppercase[:n])
    width = len(str(n - 1))
    return [f"v{k:0{width}d}" for k in range(n)]


def _bernoulli(rng: random.Random, p: Fraction) -> bool:
    return rng.randrange(p.denominator) < p.numerator


def gen_random(config: GenConfig) -> Graph:
    """Directed G(n, p) market: seller ``s`` plus ``n`` buyers.

    Arcs are drawn independently for every ordered pair (seller or buyer to
    buyer).  When ``edge_prob > 0`` the seller is given at least one arc.
    Values are uniform integers in ``[1, value_max]``; weights uniform in
    ``[0, weight_max]``.

    With negative weights enabled every buyer draws a potential ``p`` in
    ``[0, weight_max]`` and arc ``(u, v)`` gets a weight uniform in
    ``[max(p(u) - p(v), -weight_max), weight_max]``.  Such a weight is a
    nonnegative base plus ``p(u) - p(v)``; the potentials cancel around any
    cycle, so no negative cycle can arise.
    """
    rng = random.Random(config.seed)
    names = node_names(config.n)
    seller = "s"
    values = {v: rng.randint(1, config.value_max) for v in names}
    arcs = [(u, v) for u in [seller] + names for v in names
            if u != v and _bernoulli(rng, config.edge_prob)]
    if names and config.edge_prob > 0 and not any(u == seller for u, _ in arcs):
        arcs.insert(0, (seller, rng.choice(names)))

    wmax = config.weight_max
    if not config.allow_negative_weights:
        return Graph(seller, values, [(u, v, rng.randint(0, wmax)) for u, v in arcs])
    # The seller has no in-arcs, so it sits on no cycle and needs no potential.
    potential = {v: rng.randint(0, wmax) for v in names}
    potential[seller] = 0
    edges = [(u, v, rng.randint(max(potential[u] - potential[v], -wmax), wmax)) for u, v in arcs]
    return Graph(seller, values, edges)
