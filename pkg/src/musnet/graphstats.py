"""Degree statistics, connected components and Louvain modularity."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError
from .network import MusicNetwork


def average_degree(net: MusicNetwork) -> float:
    """``2E/N`` for undirected networks, ``E/N`` for directed ones."""
    if net.n_nodes == 0:
        raise DomainError("average degree of an empty network")
    factor = 1 if net.directed else 2
    return factor * net.n_edges / net.n_nodes


def degree_histogram(net: MusicNetwork) -> dict[int, int]:
    """Number of nodes of each (total) degree."""
    return dict(sorted(Counter(net.degrees().values()).items()))


def connected_components(net: MusicNetwork) -> list[set[int]]:
    """Components (weak components for directed networks), largest first."""
    parent = {i: i for i in net.node_ids()}

    def root(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in net.edges:
        a, b = root(e.source), root(e.target)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, set[int]] = defaultdict(set)
    for i in parent:
        groups[root(i)].add(i)
    return sorted(groups.values(), key=lambda s: (-len(s), min(s)))


# -- modularity -------------------------------------------------------------


def _undirected_weights(net: MusicNetwork) -> tuple[list[int], dict[int, dict[int, float]], dict[int, float]]:
    """Symmetric weights (directed edges summed per node pair) and self-loops."""
    ids = net.node_ids()
    nbrs: dict[int, dict[int, float]] = {i: {} for i in ids}
    loops: dict[int, float] = defaultdict(float)
    for e in net.edges:
        if e.weight <= 0:
            raise DomainError("modularity needs positive edge weights")
        if e.source == e.target:
            loops[e.source] += e.weight
            continue
        nbrs[e.source][e.target] = nbrs[e.source].get(e.target, 0.0) + e.weight
        nbrs[e.target][e.source] = nbrs[e.target].get(e.source, 0.0) + e.weight
    return ids, nbrs, loops


def modularity(net: MusicNetwork, assignment: Mapping[int, int], resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a partition, evaluated directly."""
    ids, nbrs, loops = _undirected_weights(net)
    strength = {i: sum(nbrs[i].values()) + 2 * loops.get(i, 0.0) for i in ids}
    m = sum(strength.values()) / 2
    if m == 0:
        raise DomainError("modularity is undefined for a network without edges")
    inside: dict[int, float] = defaultdict(float)
    total: dict[int, float] = defaultdict(float)
    for i in ids:
        c = assignment[i]
        total[c] += strength[i]
        inside[c] += loops.get(i, 0.0)
        for j, w in nbrs[i].items():
            if j > i and assignment[j] == c:
                inside[c] += w
    return sum(inside[c] / m - resolution * (total[c] / (2 * m)) ** 2 for c in total)


@dataclass
class CommunityAssignment:
    node_to_community: dict[int, int]
    modularity: float
    seed: int | None = None
    resolution: float = 1.0
    levels: int = field(default=0, compare=False)

    @property
    def n_communities(self) -> int:
        return len(set(self.node_to_community.values()))

    def communities(self) -> list[set[int]]:
        out: dict[int, set[int]] = defaultdict(set)
        for node, c in self.node_to_community.items():
            out[c].add(node)
        return [out[c] for c in sorted(out)]

    def sizes(self) -> list[int]:
        return sorted((len(c) for c in self.communities()), reverse=True)


def _one_level(nbrs: list[dict[int, float]], loops: list[float], resolution: float,
               rng: np.random.Generator) -> tuple[list[int], bool]:
    n = len(nbrs)
    k = [sum(nbrs[i].values()) + 2 * loops[i] for i in range(n)]
    m = sum(k) / 2
    comm = list(range(n))
    tot = list(k)
    improved = False
    moved = True
    while moved:
        moved = False
        for i in rng.permutation(n):
            i = int(i)
            ci = comm[i]
            links: dict[int, float] = defaultdict(float)
            for j, w in nbrs[i].items():
                links[comm[j]] += w
            tot[ci] -= k[i]
            best_c = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * k[i] / (2 * m)
            for c, w in sorted(links.items()):
                gain = w - resolution * tot[c] * k[i] / (2 * m)
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            tot[best_c] += k[i]
            if best_c != ci:
                comm[i] = best_c
                moved = True
                improved = True
    return comm, improved


def louvain(net: MusicNetwork, resolution: float = 1.0, seed: int | None = 0,
            max_levels: int = 32) -> CommunityAssignment:
    """Louvain optimization of weighted modularity.

    Directed networks are projected onto undirected ones by summing the
    weights of the two directions.  Node visits follow a seeded random order.
    """
    if net.n_edges == 0:
        raise DomainError("modularity is undefined for a network without edges")
    ids, nbr_map, loop_map = _undirected_weights(net)
    pos = {node: i for i, node in enumerate(ids)}
    nbrs = [{pos[j]: w for j, w in nbr_map[node].items()} for node in ids]
    loops = [loop_map.get(node, 0.0) for node in ids]
    rng = np.random.default_rng(seed)
    membership = list(range(len(ids)))
    levels = 0
    while levels < max_levels:
        comm, improved = _one_level(nbrs, loops, resolution, rng)
        if not improved:
            break
        levels += 1
        dense = {c: i for i, c in enumerate(dict.fromkeys(comm))}
        comm = [dense[c] for c in comm]
        membership = [comm[c] for c in membership]
        size = len(dense)
        new_nbrs: list[dict[int, float]] = [defaultdict(float) for _ in range(size)]
        new_loops = [0.0] * size
        for i, row in enumerate(nbrs):
            ci = comm[i]
            new_loops[ci] += loops[i]
            for j, w in row.items():
                cj = comm[j]
                if ci == cj:
                    if j > i:
                        new_loops[ci] += w
                else:
                    new_nbrs[ci][cj] += w
        nbrs = [dict(r) for r in new_nbrs]
        loops = new_loops
    # relabel communities in order of first appearance over node order
    dense = {c: i for i, c in enumerate(dict.fromkeys(membership))}
    assignment = {node: dense[membership[i]] for i, node in enumerate(ids)}
    q = modularity(net, assignment, resolution)
    return CommunityAssignment(assignment, q, seed, resolution, levels)


def network_stats(net: MusicNetwork, seed: int | None = 0, resolution: float = 1.0,
                  partition: CommunityAssignment | None = None) -> dict:
    """Summary used by the command line and the JSON reports.

    ``partition`` reuses a community assignment already computed for ``net``.
    """
    comps = connected_components(net)
    stats = {
        "nodes": net.n_nodes,
        "edges": net.n_edges,
        "directed": net.directed,
        "average_degree": average_degree(net) if net.n_nodes else 0.0,
        "components": len(comps),
        "largest_component": len(comps[0]) if comps else 0,
        "modularity": None,
        "communities": None,
        "community_sizes": [],
    }
    if net.n_edges:
        part = partition or louvain(net, resolution=resolution, seed=seed)
        stats["modularity"] = part.modularity
        stats["communities"] = part.n_communities
        stats["community_sizes"] = part.sizes()
    return stats


def format_stats(stats: Mapping) -> str:
    rows = [
        ("nodes", stats["nodes"]),
        ("edges", stats["edges"]),
        ("average degree", f"{stats['average_degree']:.4f}"),
        ("components", stats["components"]),
    ]
    if stats.get("modularity") is not None:
        rows.append(("modularity", f"{stats['modularity']:.4f}"))
        rows.append(("communities", stats["communities"]))
        sizes = stats["community_sizes"]
        shown = ", ".join(map(str, sizes[:10])) + (" ..." if len(sizes) > 10 else "")
        rows.append(("community sizes", shown))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
