import itertools
import math
from collections import Counter

import numpy as np
import pytest

from musnet import (DomainError, Edge, MusicNetwork, Node, PitchClassSet, generate_progression,
                    grow_preferential_network, minimal_distance, pcs_dictionary, pcs_ego_network,
                    pcs_network, rhythm_p_dictionary, rhythm_network, rlead_network, vlead_network,
                    vlead_network_by_name, voice_leading)
from musnet.graphstats import average_degree, connected_components


def edge_keys(net):
    return {(e.source, e.target) for e in net.edges}


def in_window(d, thup, thdw):
    return thdw + 1e-12 < d <= thup + 1e-12


# -- network container --------------------------------------------------------


def test_network_container_rules():
    net = MusicNetwork([Node(0, "a"), Node(1, "b"), Node(2, "c")])
    net.add_edge(Edge(2, 0))
    assert net.has_edge(0, 2) and net.edges[0].key == (0, 2)
    with pytest.raises(DomainError):
        net.add_edge(Edge(0, 2))
    with pytest.raises(DomainError):
        net.add_edge(Edge(0, 0))
    with pytest.raises(DomainError):
        net.add_edge(Edge(0, 9))
    with pytest.raises(DomainError):
        net.add_node(Node(1, "dup"))
    assert net.find("b") == 1
    assert net.degrees() == {0: 1, 1: 0, 2: 1}
    d = MusicNetwork([Node(0, "a"), Node(1, "b")], directed=True)
    d.add_edge(Edge(1, 0))
    assert d.successors(1)[0][0] == 0 and d.successors(0) == []


# -- threshold networks ---------------------------------------------------------


@pytest.mark.parametrize("thup, thdw", [(1.0, 0.0), (1.5, 0.0), (math.sqrt(2), 1.0), (2.5, 1.5)])
def test_pcs_network_matches_pairwise_definition(thup, thdw):
    d = pcs_dictionary(4)
    net = pcs_network(d, thup, thdw)
    iv = [np.array(e.descriptor) for e in d]
    expected = {(i, j) for i, j in itertools.combinations(range(len(d)), 2)
                if in_window(float(np.linalg.norm(iv[i] - iv[j])), thup, thdw)}
    assert edge_keys(net) == expected
    for e in net.edges:
        assert e.weight == pytest.approx(1 / math.sqrt(e.distance2))


def test_vlead_network_matches_pairwise_definition(triads_normal):
    d = triads_normal
    pcs = [d.pcs(i) for i in range(len(d))]
    dist = {(i, j): float(minimal_distance(pcs[i], pcs[j])) for i, j in itertools.combinations(range(len(d)), 2)}
    for thup, thdw in [(1.0, 0.0), (1.5, 0.1), (2.0, 1.5)]:
        net = vlead_network(d, thup, thdw)
        assert edge_keys(net) == {k for k, v in dist.items() if in_window(v, thup, thdw)}
        for e in net.edges:
            assert e.operator == str(voice_leading(pcs[e.source], pcs[e.target])[1])


def test_vlead_network_mixed_cardinalities():
    d = pcs_dictionary("all", tet=6, reduction="normal")
    net = vlead_network(d, thup=1.5, thdw=0.0)
    pcs = [d.pcs(i) for i in range(len(d))]
    expected = {(i, j) for i, j in itertools.combinations(range(len(d)), 2)
                if in_window(float(voice_leading(pcs[i], pcs[j])[0]), 1.5, 0.0)}
    assert edge_keys(net) == expected


TRIAD_SLICES = {  # operator distance, edges, components (frozen from a full build)
    "a": (1.0, 540, 1),
    "b": (math.sqrt(2), 972, 2),
    "c": (math.sqrt(3), 652, 2),
    "d": (math.sqrt(5), 1536, 1),
}


@pytest.mark.parametrize("panel", sorted(TRIAD_SLICES))
def test_triad_voice_leading_slices(triads_normal, panel):
    dist, n_edges, n_comp = TRIAD_SLICES[panel]
    net = vlead_network(triads_normal, thup=dist, thdw=dist - 0.01)
    assert net.n_edges == n_edges
    assert len(connected_components(net)) == n_comp


def test_slice_c_largest_component_excludes_augmented(triads_normal):
    net = vlead_network(triads_normal, thup=math.sqrt(3), thdw=math.sqrt(3) - 0.01)
    comps = connected_components(net)
    augmented = {i for i, e in enumerate(triads_normal) if PitchClassSet(e.form).prime_form().pitches == (0, 4, 8)}
    assert not (augmented & comps[0])
    assert augmented <= comps[1]


def test_operator_neighbourhood_of_c_major(triads_normal):
    net = vlead_network_by_name(triads_normal, "O(1)")
    c = triads_normal.find(PitchClassSet([0, 4, 7]))
    nbrs = {frozenset(net.node(j).form) for j, _ in net.successors(c)}
    expected = {frozenset(s) for s in ([0, 3, 7], [0, 4, 6], [0, 4, 8], [5, 7, 0], [1, 4, 7], [4, 7, 11])}
    assert nbrs == expected
    assert all(e.operator == "O(1)" for e in net.edges)
    with pytest.raises(DomainError):
        vlead_network_by_name(triads_normal, "O()")


def test_by_name_is_a_filter_of_the_distance_slice(triads_normal):
    by_name = vlead_network_by_name(triads_normal, "O(2)")
    slice_ = vlead_network(triads_normal, thup=2.0, thdw=1.99)
    assert edge_keys(by_name) == {e.key for e in slice_.edges if e.operator == "O(2)"}


@pytest.mark.parametrize("name", ["O(1)", "O(1,1)", "O(1,2)", "O(3)"])
def test_by_name_edges_equal_operator_check(triads_normal, name):
    from musnet.metrics import ops_check_by_name
    d = triads_normal
    pcs = [d.pcs(i) for i in range(len(d))]
    expected = {(i, j) for i, j in itertools.combinations(range(len(d)), 2)
                if ops_check_by_name(pcs[i], pcs[j], name)}
    assert edge_keys(vlead_network_by_name(d, name)) == expected


def test_transposition_class_triads_nearest_neighbours():
    d = pcs_dictionary(3, reduction="normal0")
    net = vlead_network_by_name(d, "O(1)")
    assert (net.n_nodes, net.n_edges) == (19, 26)
    assert len(connected_components(net)) == 1
    # every edge is a nearest-neighbour edge of the full triad space
    full = pcs_dictionary(3, reduction="normal")
    full_net = vlead_network_by_name(full, "O(1)")
    full_edges = {frozenset((frozenset(full_net.node(e.source).form), frozenset(full_net.node(e.target).form)))
                  for e in full_net.edges}
    for e in net.edges:
        pair = frozenset((frozenset(net.node(e.source).form), frozenset(net.node(e.target).form)))
        assert pair in full_edges


def test_rhythm_networks():
    d = rhythm_p_dictionary(8, 3)
    dv = [np.array(e.descriptor) for e in d]
    ioi = [np.array(e.extra["interval_vector"]) for e in d]
    net = rhythm_network(d, thup=1.5, thdw=0.0)
    assert edge_keys(net) == {(i, j) for i, j in itertools.combinations(range(len(d)), 2)
                              if in_window(float(np.linalg.norm(dv[i] - dv[j])), 1.5, 0.0)}
    rnet = rlead_network(d, thup=2.0, thdw=0.1)
    assert edge_keys(rnet) == {(i, j) for i, j in itertools.combinations(range(len(d)), 2)
                               if in_window(float(np.linalg.norm(ioi[i] - ioi[j])), 2.0, 0.1)}


# -- probabilistic slicing ---------------------------------------------------------


def test_prob_slicing_is_seeded_and_worker_independent():
    d = pcs_dictionary(5, tet=12, reduction="normal")
    full = edge_keys(pcs_network(d, 1.5, 0.0))
    a = pcs_network(d, 1.5, 0.0, prob=0.3, seed=7, workers=1)
    b = pcs_network(d, 1.5, 0.0, prob=0.3, seed=7, workers=4)
    c = pcs_network(d, 1.5, 0.0, prob=0.3, seed=8, workers=1)
    assert a == b
    assert edge_keys(a) != edge_keys(c)
    assert edge_keys(a) <= full
    assert abs(len(edge_keys(a)) / len(full) - 0.3) < 0.05
    for bad in (0.0, 1.5):
        with pytest.raises(DomainError):
            pcs_network(d, 1.5, 0.0, prob=bad)


def test_vlead_prob_slicing_seeded(triads_normal):
    a = vlead_network(triads_normal, 1.0, 0.0, prob=0.5, seed=3, workers=1)
    b = vlead_network(triads_normal, 1.0, 0.0, prob=0.5, seed=3, workers=3)
    assert a == b and 0 < a.n_edges < 540


def test_bad_window():
    with pytest.raises(DomainError):
        pcs_network(pcs_dictionary(3), thup=1.0, thdw=1.0)


# -- ego networks -----------------------------------------------------------------


def test_ego_network():
    d = pcs_dictionary(3, reduction="normal")
    ego = pcs_ego_network(PitchClassSet([0, 4, 7]), d, thup_e=1.0, thdw_e=0.0, thup=0, metric="vl")
    assert ego.node(0).attributes["ego"] is True
    assert ego.node(0).form == (0, 4, 7)
    assert ego.n_nodes == 7 and ego.n_edges == 6
    assert all(e.source == 0 for e in ego.edges)
    full = pcs_ego_network(PitchClassSet([0, 4, 7]), d, thup_e=1.0, thdw_e=0.0, thup=1.5, thdw=0.0, metric="vl")
    assert full.n_edges > ego.n_edges
    iv = pcs_ego_network(PitchClassSet([0, 4, 7]).prime_form(), pcs_dictionary(3), thup_e=1.5, thdw_e=0.0)
    assert {iv.node(i).form for i in iv.node_ids()[1:]} == {
        e.form for e in pcs_dictionary(3)
        if 0 < math.dist(e.descriptor, (0, 0, 1, 1, 1, 0)) <= 1.5}
    with pytest.raises(DomainError):
        pcs_ego_network(PitchClassSet([0, 4, 7]), d, metric="bogus")


# -- walks ----------------------------------------------------------------------


def small_graph():
    net = MusicNetwork([Node(i, f"n{i}") for i in range(4)])
    for a, b, w in [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 5.0), (1, 2, 1.0)]:
        net.add_edge(Edge(a, b, w))
    return net


def first_steps(net, policy, n=6000):
    counts = Counter()
    for s in range(n):
        counts[generate_progression(net, 0, 2, policy, seed=s).nodes[1]] += 1
    return counts


def chi2_ok(counts, probs, n):
    stat = sum((counts[k] - n * p) ** 2 / (n * p) for k, p in probs.items())
    # 99.9% quantile of chi-square with 2 degrees of freedom
    return stat < 13.82


def test_walk_policies_follow_their_distributions():
    net = small_graph()
    n = 6000
    assert chi2_ok(first_steps(net, "uniform", n), {1: 1 / 3, 2: 1 / 3, 3: 1 / 3}, n)
    assert chi2_ok(first_steps(net, "weight", n), {1: 1 / 8, 2: 2 / 8, 3: 5 / 8}, n)
    # neighbour degrees are 2, 2, 1
    assert chi2_ok(first_steps(net, "degree", n), {1: 2 / 5, 2: 2 / 5, 3: 1 / 5}, n)


def test_walk_determinism_and_truncation(triads_normal):
    net = vlead_network(triads_normal, 1.0, 0.0)
    a = generate_progression(net, "3-1", 20, seed=11)
    b = generate_progression(net, "3-1", 20, seed=11)
    assert a == b and len(a.nodes) == 20 and not a.truncated
    assert a.parsimony == pytest.approx(1.0)
    for x, y in zip(a.nodes, a.nodes[1:]):
        assert net.has_edge(x, y)
    d = MusicNetwork([Node(0, "a"), Node(1, "b")], directed=True)
    d.add_edge(Edge(0, 1))
    w = generate_progression(d, 0, 5, seed=0)
    assert w.truncated and w.nodes == [0, 1]
    with pytest.raises(DomainError):
        generate_progression(d, 0, 5, policy="greedy")


# -- growth -----------------------------------------------------------------------


def test_preferential_growth():
    d = pcs_dictionary(5, reduction="normal")
    a = grow_preferential_network(d, m=2, seed=5)
    assert a == grow_preferential_network(d, m=2, seed=5)
    assert a != grow_preferential_network(d, m=2, seed=6)
    assert a.n_edges == 1 + 2 * (len(d) - 2)
    assert average_degree(a) == pytest.approx(2 * a.n_edges / len(d))
    tree = grow_preferential_network(d, m=1, seed=0)
    assert tree.n_edges == len(d) - 1 and len(connected_components(tree)) == 1
    # preferential attachment produces hubs far above the mean degree
    assert max(a.degrees().values()) > 5 * average_degree(a)
    with pytest.raises(DomainError):
        grow_preferential_network(d, m=0)


def test_max_degree_grows_with_size():
    d = pcs_dictionary(5, reduction="normal")
    means = []
    for size in (50, 200, 792):
        sub = d.subset(d.entries[:size])
        means.append(np.mean([max(grow_preferential_network(sub, m=1, seed=s).degrees().values())
                              for s in range(10)]))
    assert means[0] < means[1] < means[2]


def test_growth_with_affinity():
    d = pcs_dictionary(3)
    net = grow_preferential_network(d, m=1, seed=1, affinity=lambda a, b: 1.0 if a.form[1] == b.form[1] else 0.0)
    for e in net.edges:
        if e.source != 0:
            assert d[e.source].form[1] == d[e.target].form[1]
