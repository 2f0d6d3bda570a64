import pytest

from diffusion_auction.generate import GenConfig, gen_random, node_names
from diffusion_auction.graph import assert_no_negative_cycles
from diffusion_auction.io import dumps_graph
from diffusion_auction.mechanisms import EmptyMarket, wdm


def test_same_seed_same_bytes():
    assert dumps_graph(gen_random(GenConfig(seed=42))) == dumps_graph(gen_random(GenConfig(seed=42)))
    assert dumps_graph(gen_random(GenConfig(seed=42))) != dumps_graph(gen_random(GenConfig(seed=43)))


def test_zero_probability_gives_empty_market():
    g = gen_random(GenConfig(n=4, edge_prob=0, seed=1))
    assert not g.weights
    with pytest.raises(EmptyMarket):
        wdm(g, g.truthful_profile())


def test_negative_weights_never_form_cycles():
    seen_negative = False
    for seed in range(500):
        g = gen_random(GenConfig(n=6, seed=seed, allow_negative_weights=True))
        assert_no_negative_cycles(g)
        seen_negative |= any(w < 0 for w in g.weights.values())
    assert seen_negative


def test_ranges_and_seller_arc():
    for seed in range(50):
        g = gen_random(GenConfig(n=5, edge_prob="1/10", seed=seed, value_max=3, weight_max=2))
        assert g.neighbors("s")
        assert all(1 <= v <= 3 for v in g.values.values())
        assert all(0 <= w <= 2 for w in g.weights.values())
        assert all(v != "s" for _, v in g.weights)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(edge_prob="3/2")
    with pytest.raises(TypeError):
        GenConfig(edge_prob=0.5)


def test_node_names():
    assert node_names(3) == ["A", "B", "C"]
    assert node_names(30)[0] == "v00"
