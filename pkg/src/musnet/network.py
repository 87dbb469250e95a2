"""In-memory network of musical objects."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .errors import DomainError


@dataclass
class Node:
    id: int
    label: str
    form: tuple = ()
    descriptor: tuple = ()
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass
class Edge:
    source: int
    target: int
    weight: float = 1.0
    distance2: int | None = None
    operator: str | None = None
    count: int | None = None

    @property
    def key(self) -> tuple[int, int]:
        return (self.source, self.target)


class MusicNetwork:
    """Nodes and weighted edges with deterministic ordering.

    Undirected edges are stored once with ``source < target``.  Edges are
    kept sorted by ``(source, target)``.
    """

    def __init__(self, nodes: Iterable[Node] = (), edges: Iterable[Edge] = (),
                 directed: bool = False, allow_self_loops: bool = False):
        self.directed = directed
        self.allow_self_loops = allow_self_loops
        self.nodes: list[Node] = []
        self._index: dict[int, int] = {}
        self._edges: dict[tuple[int, int], Edge] = {}
        self._sorted: list[Edge] | None = []
        self._adj: dict[int, list[tuple[int, Edge]]] | None = None
        for n in nodes:
            self.add_node(n)
        for e in edges:
            self.add_edge(e)

    # -- construction ------------------------------------------------------

    def add_node(self, node: Node) -> Node:
        if node.id in self._index:
            raise DomainError(f"duplicate node id {node.id}")
        self._index[node.id] = len(self.nodes)
        self.nodes.append(node)
        self._adj = None
        return node

    def add_edge(self, edge: Edge) -> Edge:
        if edge.source not in self._index or edge.target not in self._index:
            raise DomainError(f"edge {edge.key} has an endpoint that is not a node")
        if edge.source == edge.target and not self.allow_self_loops:
            raise DomainError(f"self-loop on node {edge.source}")
        if not self.directed and edge.source > edge.target:
            edge.source, edge.target = edge.target, edge.source
        if edge.key in self._edges:
            raise DomainError(f"duplicate edge {edge.key}")
        self._edges[edge.key] = edge
        self._sorted = None
        self._adj = None
        return edge

    # -- access ------------------------------------------------------------

    @property
    def edges(self) -> list[Edge]:
        if self._sorted is None:
            self._sorted = [self._edges[k] for k in sorted(self._edges)]
        return self._sorted

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[self._index[node_id]]
        except KeyError:
            raise DomainError(f"no node with id {node_id}") from None

    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def find(self, key: "int | str") -> int:
        """Node id from an id or a label."""
        if isinstance(key, int) and key in self._index:
            return key
        for n in self.nodes:
            if n.label == key:
                return n.id
        raise DomainError(f"no node {key!r}")

    def edge(self, source: int, target: int) -> Edge | None:
        if not self.directed and source > target:
            source, target = target, source
        return self._edges.get((source, target))

    def has_edge(self, source: int, target: int) -> bool:
        return self.edge(source, target) is not None

    def _adjacency(self) -> dict[int, list[tuple[int, Edge]]]:
        if self._adj is None:
            adj: dict[int, list[tuple[int, Edge]]] = {n.id: [] for n in self.nodes}
            for e in self.edges:
                adj[e.source].append((e.target, e))
                if not self.directed and e.source != e.target:
                    adj[e.target].append((e.source, e))
            for v in adj.values():
                v.sort(key=lambda t: t[0])
            self._adj = adj
        return self._adj

    def successors(self, node_id: int) -> list[tuple[int, Edge]]:
        """Neighbours reachable in one step (out-neighbours when directed)."""
        return self._adjacency()[node_id]

    def degree(self, node_id: int) -> int:
        """Total degree (in + out for directed networks)."""
        if not self.directed:
            return len(self._adjacency()[node_id])
        return sum(1 for e in self.edges if node_id in (e.source, e.target))

    def degrees(self) -> dict[int, int]:
        out = {n.id: 0 for n in self.nodes}
        for e in self.edges:
            out[e.source] += 1
            out[e.target] += 1
        return out

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MusicNetwork):
            return NotImplemented
        return (self.directed == other.directed and self.nodes == other.nodes
                and self.edges == other.edges)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"<MusicNetwork {kind} nodes={self.n_nodes} edges={self.n_edges}>"
