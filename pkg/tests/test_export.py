from fractions import Fraction as F

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from musnet import (DomainError, Edge, MusicNetwork, Node, SchemaError, louvain, pcs_dictionary, read_csv,
                    read_dictionary_csv, read_gexf, rhythm_p_dictionary, vlead_network, write_csv,
                    write_dictionary_csv, write_gexf)
from musnet.score import ChordSequence, score_network
from musnet.pcs import PitchClassSet


def test_csv_round_trip(tmp_path, triads_normal):
    net = vlead_network(triads_normal, 1.5, 0.1)
    write_csv(net, tmp_path)
    assert read_csv(tmp_path) == net


def test_empty_network_gives_header_only_files(tmp_path):
    write_csv(MusicNetwork(), tmp_path)
    for name in ("nodes.csv", "edges.csv"):
        lines = (tmp_path / name).read_text().splitlines()
        assert len(lines) == 2 and lines[0].startswith("# musnet-network/1")
    assert read_csv(tmp_path) == MusicNetwork()


def test_golden_nearest_neighbour_files(tmp_path, fixtures, triads_normal):
    write_csv(vlead_network(triads_normal, 1.0, 0.0), tmp_path)
    for name in ("nodes.csv", "edges.csv"):
        assert (tmp_path / name).read_bytes() == (fixtures / "golden" / "triads_d1" / name).read_bytes()


def test_schema_checks(tmp_path):
    write_csv(MusicNetwork([Node(0, "a")]), tmp_path)
    text = (tmp_path / "nodes.csv").read_text()
    (tmp_path / "nodes.csv").write_text(text.replace("musnet-network/1", "other/9"))
    with pytest.raises(SchemaError, match="expected schema"):
        read_csv(tmp_path)
    (tmp_path / "nodes.csv").write_text(text.replace("id,label", "ident,label"))
    with pytest.raises(SchemaError, match="columns"):
        read_csv(tmp_path)
    (tmp_path / "nodes.csv").write_text(text + "x,b,,,\r\n")
    with pytest.raises(SchemaError):
        read_csv(tmp_path)
    with pytest.raises(SchemaError, match="not found"):
        read_csv(tmp_path / "nowhere")


def test_directed_score_network_round_trips(tmp_path):
    X, Y = PitchClassSet([0, 4, 7]), PitchClassSet([7, 11, 2])
    net = score_network(ChordSequence([X, X, Y, X], "s"), keep_repeats=True)
    write_csv(net, tmp_path)
    back = read_csv(tmp_path)
    assert back == net and back.directed and back.allow_self_loops
    write_gexf(net, tmp_path / "g.gexf")
    g, assignment = read_gexf(tmp_path / "g.gexf")
    assert g == net and assignment is None


def test_gexf_round_trip_with_communities(tmp_path, triads_normal):
    net = vlead_network(triads_normal, 1.0, 0.0)
    part = louvain(net).node_to_community
    write_gexf(net, tmp_path / "n.gexf", part)
    back, got = read_gexf(tmp_path / "n.gexf")
    assert back == net and got == part
    g = nx.read_gexf(tmp_path / "n.gexf")
    assert g.number_of_nodes() == 220 and g.number_of_edges() == 540
    assert "community" in next(iter(g.nodes(data=True)))[1]


def test_minimal_gexf(tmp_path):
    net = MusicNetwork([Node(0, "only")])
    write_gexf(net, tmp_path / "one.gexf")
    text = (tmp_path / "one.gexf").read_text()
    assert 'version="1.2"' in text and "community" not in text
    assert read_gexf(tmp_path / "one.gexf")[0] == net
    assert nx.read_gexf(tmp_path / "one.gexf").number_of_nodes() == 1


def test_csv_and_gexf_agree(tmp_path):
    d = rhythm_p_dictionary(8, 3)
    from musnet import rlead_network
    net = rlead_network(d, 2.0, 0.1)
    write_csv(net, tmp_path)
    write_gexf(net, tmp_path / "r.gexf")
    assert read_csv(tmp_path) == read_gexf(tmp_path / "r.gexf")[0] == net


def test_dictionary_round_trip(tmp_path):
    for d in (pcs_dictionary(4), pcs_dictionary(3, tet=24, reduction="normal0"), rhythm_p_dictionary(16, 5)):
        write_dictionary_csv(d, tmp_path / "d.csv")
        assert read_dictionary_csv(tmp_path / "d.csv") == d


labels = st.text(st.characters(blacklist_categories=("Cs", "Cc")) | st.sampled_from("\t\n\r"), max_size=8)
attrs = st.dictionaries(st.sampled_from(["ego", "count", "name", "vec"]),
                        st.one_of(st.booleans(), st.integers(-5, 5), labels,
                                  st.lists(st.integers(0, 9), max_size=3).map(tuple)), max_size=3)


@st.composite
def networks(draw):
    n = draw(st.integers(0, 8))
    directed = draw(st.booleans())
    nodes = [Node(i, draw(labels), tuple(draw(st.lists(st.integers(0, 23), max_size=4))),
                  tuple(draw(st.lists(st.integers(0, 5), max_size=3))), draw(attrs)) for i in range(n)]
    net = MusicNetwork(nodes, directed=directed, allow_self_loops=True)
    pairs = draw(st.lists(st.tuples(st.integers(0, max(n - 1, 0)), st.integers(0, max(n - 1, 0))),
                          max_size=12)) if n else []
    seen = set()
    for a, b in pairs:
        key = (a, b) if directed else tuple(sorted((a, b)))
        if key in seen:
            continue
        seen.add(key)
        net.add_edge(Edge(a, b, draw(st.floats(0.01, 100, allow_nan=False)),
                          draw(st.one_of(st.none(), st.integers(0, 50))),
                          draw(st.one_of(st.none(), st.sampled_from(["O(1)", "O(1,2)"]))),
                          draw(st.one_of(st.none(), st.integers(1, 9)))))
    return net


@given(networks())
def test_round_trip_property(net):
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as tmp:
        write_csv(net, tmp)
        assert read_csv(tmp) == net
        write_gexf(net, Path(tmp) / "n.gexf", {i: i % 2 for i in net.node_ids()})
        back, part = read_gexf(Path(tmp) / "n.gexf")
        assert back == net
        assert part == ({i: i % 2 for i in net.node_ids()} or None)


def test_fraction_forms_survive(tmp_path):
    net = MusicNetwork([Node(0, "c", (F(1, 8), F(3, 8)), (1, 0))])
    write_csv(net, tmp_path)
    assert read_csv(tmp_path).node(0).form == (F(1, 8), F(3, 8))


def test_control_characters_are_rejected(tmp_path):
    net = MusicNetwork([Node(0, "bad\x00label")])
    with pytest.raises(DomainError, match="control character"):
        write_csv(net, tmp_path)
    with pytest.raises(DomainError, match="control character"):
        write_gexf(net, tmp_path / "x.gexf")
