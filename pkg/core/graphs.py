import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from .exceptions import ConfigurationError, GraphError
from .group import ElementLike, GroupElement, element, torsion_elements, unit_vectors, zero


logger = logging.getLogger(__name__)

UNREACHABLE = math.inf

Edge = Tuple[Hashable, Hashable]


def edge_key(u, v) -> Edge:
    """Canonical name of the unordered pair {u, v}."""
    return (u, v) if u <= v else (v, u)


def vertex_to_json(v):
    if isinstance(v, GroupElement):
        return v.to_json()
    return v


@dataclass(frozen=True)
class EdgeSet:
    """
    Set of unordered vertex pairs together with the vertex set carrying them.

    Double rays, matchings, colour classes and phi-images are all passed around
    as EdgeSets. `dropped` counts edges lost to a window boundary when the set
    was produced by a translation or a product map.
    """
    edges: FrozenSet[Edge] = frozenset()
    vertices: Optional[FrozenSet] = None
    dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        edges = frozenset(edge_key(u, v) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise GraphError(f"loop at {u} in edge set")
        endpoints = {x for e in edges for x in e}
        if self.vertices is None:
            vertices = frozenset(endpoints)
        else:
            vertices = frozenset(self.vertices)
            missing = endpoints - vertices
            if missing:
                raise GraphError(f"edge endpoints {sorted(missing)[:3]} outside the carrying vertex set")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "vertices", vertices)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Hashable, Hashable]], vertices: Optional[Iterable] = None) -> "EdgeSet":
        return cls(frozenset(pairs), None if vertices is None else frozenset(vertices))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __contains__(self, pair) -> bool:
        u, v = pair
        return edge_key(u, v) in self.edges

    @cached_property
    def adjacency(self) -> Dict[Hashable, List]:
        adj: Dict[Hashable, List] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    def degree(self, v) -> int:
        return len(self.adjacency.get(v, ()))

    def neighbours(self, v) -> List:
        return self.adjacency.get(v, [])

    def union(self, *others: "EdgeSet") -> "EdgeSet":
        edges = set(self.edges)
        vertices = set(self.vertices)
        dropped = self.dropped
        for other in others:
            edges |= other.edges
            vertices |= other.vertices
            dropped += other.dropped
        return EdgeSet(frozenset(edges), frozenset(vertices), dropped=dropped)

    def restrict(self, vertices: Iterable) -> "EdgeSet":
        """Induced sub-edge-set on `vertices`."""
        keep = frozenset(vertices) & self.vertices
        return EdgeSet(frozenset(e for e in self.edges if e[0] in keep and e[1] in keep), keep)

    def to_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    def to_json(self) -> list:
        return [[vertex_to_json(u), vertex_to_json(v)] for u, v in sorted(self.edges)]


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """Finite simple graph, usually a (windowed) Cayley graph with generator labels on edges."""
    graph: nx.Graph
    dimension: int = 0
    moduli: Tuple[int, ...] = ()

    def __post_init__(self):
        if nx.number_of_selfloops(self.graph):
            raise GraphError("Cayley graphs carry no loops")
        object.__setattr__(self, "moduli", tuple(self.moduli))

    @cached_property
    def vertices(self) -> List:
        return sorted(self.graph.nodes)

    @cached_property
    def _neighbours(self) -> Dict[Hashable, List]:
        return {v: sorted(self.graph.adj[v]) for v in self.graph.nodes}

    def neighbours(self, v) -> List:
        try:
            return self._neighbours[v]
        except KeyError:
            raise GraphError(f"{v} is not a vertex of the graph") from None

    def has_vertex(self, v) -> bool:
        return v in self.graph

    def has_edge(self, u, v) -> bool:
        return self.graph.has_edge(u, v)

    def generator(self, u, v):
        return self.graph.edges[u, v].get("generator")

    def number_of_vertices(self) -> int:
        return self.graph.number_of_nodes()

    def number_of_edges(self) -> int:
        return self.graph.number_of_edges()

    def edge_set(self) -> EdgeSet:
        return EdgeSet(frozenset(self.graph.edges), frozenset(self.graph.nodes))


@dataclass(frozen=True, eq=False)
class WindowedGraph:
    """
    Finite window of an infinite vertex-transitive graph.

    `frontier` holds the vertices with an ambient neighbour outside the window,
    `outside_degree` how many such neighbours each one has. The interior is the
    set of vertices at distance greater than `margin` from the frontier.
    """
    graph: FiniteGraph
    frontier: FrozenSet = frozenset()
    margin: int = 0
    radius: Optional[int] = None
    outside_degree: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.margin < 0:
            raise ConfigurationError(f"margin must be nonnegative, got {self.margin}")
        frontier = frozenset(self.frontier)
        stray = [v for v in frontier if not self.graph.has_vertex(v)]
        if stray:
            raise GraphError(f"frontier vertices {stray[:3]} are not in the window")
        outside = {v: int(self.outside_degree.get(v, 1)) for v in frontier}
        object.__setattr__(self, "frontier", frontier)
        object.__setattr__(self, "outside_degree", outside)

    @property
    def vertices(self) -> List:
        return self.graph.vertices

    @property
    def dimension(self) -> int:
        return self.graph.dimension

    @property
    def moduli(self) -> Tuple[int, ...]:
        return self.graph.moduli

    def neighbours(self, v) -> List:
        return self.graph.neighbours(v)

    def contains(self, v) -> bool:
        return self.graph.has_vertex(v)

    @cached_property
    def distance_to_frontier(self) -> Dict[Hashable, float]:
        if not self.frontier:
            return {v: UNREACHABLE for v in self.vertices}
        lengths = nx.multi_source_dijkstra_path_length(self.graph.graph, set(self.frontier))
        return {v: lengths.get(v, UNREACHABLE) for v in self.vertices}

    @cached_property
    def interior(self) -> FrozenSet:
        return frozenset(v for v, d in self.distance_to_frontier.items() if d > self.margin)


GraphLike = Union[FiniteGraph, WindowedGraph, nx.Graph]


def as_finite_graph(G: GraphLike) -> FiniteGraph:
    if isinstance(G, WindowedGraph):
        return G.graph
    if isinstance(G, FiniteGraph):
        return G
    if isinstance(G, nx.Graph):
        return FiniteGraph(G)
    raise GraphError(f"unsupported graph type {type(G).__name__}")


def build_abelian_window(
    rank: int,
    moduli: Sequence[int] = (),
    radius: int = 1,
    margin: int = 0,
    generators: Optional[Sequence[ElementLike]] = None,
) -> WindowedGraph:
    """
    Window of the Cayley graph of Z^rank x Z_m1 x ... : the free part is the box
    [-radius, radius]^rank, the torsion part is complete.
    """
    if rank < 1:
        raise ConfigurationError(f"windows need at least one free coordinate, got rank {rank}")
    if margin < 0 or radius <= margin:
        raise ConfigurationError(f"need radius > margin >= 0, got radius={radius}, margin={margin}")
    moduli = tuple(moduli)
    if any(m < 2 for m in moduli):
        raise ConfigurationError(f"all moduli must be at least 2, got {moduli}")

    if generators:
        gens = [element(s, rank, moduli) for s in generators]
    else:
        gens = unit_vectors(rank, moduli)
    if any(s.is_zero() for s in gens):
        raise ConfigurationError("the identity is not a valid generator")

    box = range(-radius, radius + 1)
    vertices = [
        GroupElement(free, t.torsion, moduli)
        for free in product(box, repeat=rank)
        for t in torsion_elements(moduli)
    ]
    vertex_set = set(vertices)

    g = nx.Graph()
    g.add_nodes_from(vertices)
    outside: Dict[GroupElement, int] = {}
    for v in vertices:
        ambient = set()
        for s in gens:
            for w in (v + s, v - s):
                if w == v:
                    continue
                ambient.add(w)
                if w in vertex_set and not g.has_edge(v, w):
                    g.add_edge(v, w, generator=s)
        missing = sum(1 for w in ambient if w not in vertex_set)
        if missing:
            outside[v] = missing

    if not nx.is_connected(g):
        raise GraphError(f"generators {gens} do not generate Z^{rank} x {moduli}")

    window = WindowedGraph(FiniteGraph(g, rank, moduli), frozenset(outside), margin, radius, outside)
    logger.debug(f"Built window rank={rank} moduli={moduli} radius={radius}: {len(vertices)} vertices")
    return window


def build_grid_window(d: int, radius: int, margin: int) -> WindowedGraph:
    """Box [-radius, radius]^d of the standard Cayley graph of Z^d."""
    if d < 1:
        raise ConfigurationError(f"dimension must be at least 1, got {d}")
    return build_abelian_window(d, (), radius, margin)


def build_cayley_finite(moduli: Sequence[int], generators: Sequence[ElementLike]) -> FiniteGraph:
    moduli = tuple(moduli)
    if not moduli or any(m < 2 for m in moduli):
        raise ConfigurationError(f"all moduli must be at least 2, got {moduli}")
    gens = [element(s, 0, moduli) for s in generators]

    identity = zero(0, moduli)
    reached = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for u in frontier:
            for s in gens:
                for w in (u + s, u - s):
                    if w not in reached:
                        reached.add(w)
                        nxt.append(w)
        frontier = nxt

    vertices = list(torsion_elements(moduli))
    if len(reached) != len(vertices):
        raise GraphError(
            f"generators {gens} span only {len(reached)} of {len(vertices)} elements of Z_{moduli}"
        )

    g = nx.Graph()
    g.add_nodes_from(vertices)
    for u in vertices:
        for s in gens:
            w = u + s
            if w != u and not g.has_edge(u, w):
                g.add_edge(u, w, generator=s)
    return FiniteGraph(g, 0, moduli)


def graph_power(G: GraphLike, k: int) -> FiniteGraph:
    """Same vertices; u ~ v iff 1 <= dist_G(u, v) <= k."""
    if k < 1:
        raise ConfigurationError(f"graph power needs k >= 1, got {k}")
    base = as_finite_graph(G)
    if k == 1:
        return base
    return FiniteGraph(nx.power(base.graph, k), base.dimension, base.moduli)


def vertex_set(G: GraphLike) -> FrozenSet:
    return frozenset(as_finite_graph(G).graph.nodes)


def translate_edge_set(E: EdgeSet, g: GroupElement, window: Optional[GraphLike] = None) -> EdgeSet:
    """
    Translate every edge {u, v} to {u+g, v+g}.

    With a window, translates leaving it are dropped and counted in `dropped`.
    """
    allowed = vertex_set(window) if window is not None else None
    moved = []
    dropped = 0
    for u, v in E.edges:
        a, b = u + g, v + g
        if allowed is not None and (a not in allowed or b not in allowed):
            dropped += 1
            continue
        moved.append((a, b))
    vertices = {x + g for x in E.vertices}
    if allowed is not None:
        vertices &= allowed
    if dropped:
        logger.debug(f"Translation by {g} dropped {dropped} edges at the window boundary")
    return EdgeSet(frozenset(moved), frozenset(vertices), dropped=dropped)


def graph_distance(G: GraphLike, u, v) -> float:
    """Breadth-first distance; UNREACHABLE for disconnected pairs."""
    base = as_finite_graph(G).graph
    for x in (u, v):
        if x not in base:
            raise GraphError(f"{x} is not a vertex of the graph")
    try:
        return nx.shortest_path_length(base, u, v)
    except nx.NetworkXNoPath:
        return UNREACHABLE


def graph_to_json(G: GraphLike) -> dict:
    base = as_finite_graph(G)
    doc = {
        "moduli": list(base.moduli),
        "dimension": base.dimension,
        "radius": G.radius if isinstance(G, WindowedGraph) else None,
        "edges": [[vertex_to_json(u), vertex_to_json(v)] for u, v in sorted(edge_key(a, b) for a, b in base.graph.edges)],
        "vertices": [vertex_to_json(v) for v in base.vertices],
    }
    if isinstance(G, WindowedGraph):
        doc["margin"] = G.margin
        doc["frontier"] = [vertex_to_json(v) for v in sorted(G.frontier)]
        doc["outside_degree"] = [G.outside_degree[v] for v in sorted(G.frontier)]
    return doc


def graph_from_json(doc: Mapping) -> WindowedGraph:
    moduli = tuple(doc.get("moduli", ()))
    dimension = int(doc.get("dimension", 0))

    def parse(value):
        return element(value, dimension, moduli)

    g = nx.Graph()
    g.add_nodes_from(parse(v) for v in doc.get("vertices", ()))
    for u, v in doc["edges"]:
        g.add_edge(parse(u), parse(v))
    frontier = [parse(v) for v in doc.get("frontier", ())]
    outside = dict(zip(frontier, doc.get("outside_degree", [1] * len(frontier))))
    return WindowedGraph(
        FiniteGraph(g, dimension, moduli),
        frozenset(frontier),
        int(doc.get("margin", 0)),
        doc.get("radius"),
        outside,
    )


def edge_set_from_json(
    pairs: Sequence, dimension: int, moduli: Sequence[int] = (), vertices: Optional[Iterable] = None
) -> EdgeSet:
    edges = frozenset(edge_key(element(u, dimension, moduli), element(v, dimension, moduli)) for u, v in pairs)
    return EdgeSet(edges, None if vertices is None else frozenset(vertices))


def vertices_from_json(values: Iterable, dimension: int, moduli: Sequence[int] = ()) -> FrozenSet:
    return frozenset(element(v, dimension, moduli) for v in values)
