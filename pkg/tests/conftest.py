import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from diffusion_auction.generate import GenConfig, gen_random
from diffusion_auction.graph import Graph, Report, ReportedProfile
from diffusion_auction.io import load_fixture

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Lines collected by the acceptance tests, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1() -> Graph:
    return load_fixture("fig1")


@pytest.fixture(scope="session")
def fig1_flat(fig1) -> Graph:
    return fig1.zero_weights()


def star(bids: dict) -> Graph:
    return Graph("s", bids, [("s", n, 0) for n in bids])


def chain(*values) -> Graph:
    names = [chr(ord("A") + k) for k in range(len(values))]
    hops = ["s"] + names
    return Graph("s", dict(zip(names, values)), [(u, v, 0) for u, v in zip(hops, hops[1:])])


@st.composite
def random_graphs(draw, max_n=6, negative=True):
    n = draw(st.integers(0, max_n))
    p = draw(st.sampled_from(["1/4", "1/3", "1/2", "2/3"]))
    seed = draw(st.integers(0, 10 ** 6))
    neg = negative and draw(st.booleans())
    return gen_random(GenConfig(n=n, edge_prob=p, seed=seed, weight_max=4, allow_negative_weights=neg))


def random_profile(graph: Graph, seed: int, nil_rate=0.2) -> ReportedProfile:
    """Arbitrary feasible reports: some nil, bids in [0, 12], diffusion a subset of true neighbours."""
    rng = random.Random(seed)
    reports = {}
    for n in graph.nodes:
        if rng.random() < nil_rate:
            reports[n] = None
            continue
        bid = None if rng.random() < 0.1 else Fraction(rng.randint(0, 12))
        reports[n] = Report(bid, frozenset(v for v in sorted(graph.neighbors(n)) if rng.random() < 0.7))
    return ReportedProfile(reports)
