from diffusion_auction.dot import export_dot
from diffusion_auction.mechanisms import wdm


def test_plain_export(fig1):
    text = export_dot(fig1)
    assert text.startswith("digraph auction {") and text.rstrip().endswith("}")
    assert '"F" [label="F (10)"];' in text
    assert '"D" -> "F" [label="2"];' in text
    assert "red" not in text


def test_outcome_highlight(fig1):
    o = wdm(fig1, fig1.truthful_profile())
    text = export_dot(fig1, o.path.nodes, o.winner)
    assert '"s" -> "B" [label="1", color=red, penwidth=2];' in text
    assert '"E" -> "F" [label="0", color=red, penwidth=2];' in text
    assert '"D" -> "F" [label="2"];' in text
    assert "doublecircle" in text
    assert text == export_dot(fig1, o.path.nodes, o.winner)
