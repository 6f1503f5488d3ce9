import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from core.exceptions import ConfigurationError, GraphError, SamplingError
from core.graphs import EdgeSet, WindowedGraph, vertex_to_json
from core.group import GroupElement, element


logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class EndMark:
    """Virtual vertex standing for an end of the tree, wired to frontier vertices."""
    index: int

    @property
    def name(self) -> str:
        return f"∂{self.index}"

    def __repr__(self) -> str:
        return self.name


END_1 = EndMark(1)
END_2 = EndMark(2)


def is_end(v) -> bool:
    return isinstance(v, EndMark)


@dataclass(frozen=True, eq=False)
class SpanningTreeWithEnds:
    """
    Spanning tree of a window plus one or two virtual end-vertices.

    The tree is oriented away from `root`: the first end for windowed trees,
    a chosen real vertex for finite rooted trees (which then have no ends and
    treat the root as the escape direction of every other vertex).
    """
    tree: nx.Graph
    ends: Tuple[EndMark, ...]
    root: Hashable

    def __post_init__(self):
        if self.root not in self.tree:
            raise SamplingError(f"root {self.root!r} is not a tree vertex")
        if not nx.is_tree(self.tree):
            raise SamplingError("edge set is not a spanning tree")
        if len(self.ends) > 2:
            raise SamplingError(f"trees here have at most two ends, got {len(self.ends)}")
        if self.ends and self.root != self.ends[0]:
            raise SamplingError("windowed trees are rooted at their first end")
        for end in self.ends:
            if end not in self.tree or self.tree.degree(end) < 1:
                raise SamplingError(f"end {end!r} is not attached to the window")

    @cached_property
    def _orientation(self) -> Tuple[Dict, Dict, List]:
        parent = {self.root: None}
        children: Dict[Hashable, List] = {v: [] for v in self.tree.nodes}
        order = [self.root]
        for u, v in nx.bfs_edges(self.tree, self.root):
            parent[v] = u
            children[u].append(v)
            order.append(v)
        return parent, children, order

    @property
    def parent(self) -> Dict:
        return self._orientation[0]

    @property
    def children(self) -> Dict:
        return self._orientation[1]

    @cached_property
    def _reaches_end(self) -> Dict[Hashable, bool]:
        """Whether the subtree below a vertex contains an end other than the root."""
        _, children, order = self._orientation
        reach: Dict[Hashable, bool] = {}
        for v in reversed(order):
            reach[v] = (is_end(v) and v != self.root) or any(reach[c] for c in children[v])
        return reach

    @cached_property
    def window_vertices(self) -> List:
        return sorted(v for v in self.tree.nodes if not is_end(v))

    @cached_property
    def _window_vertex_set(self) -> FrozenSet:
        return frozenset(self.window_vertices)

    def _require_window_vertex(self, v):
        if v not in self._window_vertex_set:
            raise GraphError(f"{v!r} is not a window vertex of the tree")

    @cached_property
    def _infinite(self) -> Dict[Hashable, Tuple]:
        parent, children, _ = self._orientation
        reach = self._reaches_end
        result = {}
        for v in self.window_vertices:
            nbrs = [] if parent[v] is None else [parent[v]]
            nbrs.extend(c for c in children[v] if reach[c])
            result[v] = tuple(nbrs)
        return result

    @cached_property
    def _finite(self) -> Dict[Hashable, Tuple]:
        _, children, _ = self._orientation
        reach = self._reaches_end
        return {v: tuple(sorted(c for c in children[v] if not reach[c])) for v in self.window_vertices}

    def infinite_neighbours(self, v) -> Tuple:
        self._require_window_vertex(v)
        return self._infinite[v]

    def finite_children(self, v) -> Tuple:
        self._require_window_vertex(v)
        return self._finite[v]

    @cached_property
    def heights(self) -> Dict[Hashable, int]:
        _, _, order = self._orientation
        h: Dict[Hashable, int] = {}
        for v in reversed(order):
            if is_end(v):
                continue
            h[v] = max((h[c] + 1 for c in self._finite[v]), default=0)
        return h

    def attachments(self, end: EndMark) -> List:
        """Frontier vertices wired directly to `end`."""
        return sorted(v for v in self.tree.adj[end] if not is_end(v))

    def window_edges(self) -> EdgeSet:
        return EdgeSet(
            frozenset(e for e in self.tree.edges if not is_end(e[0]) and not is_end(e[1])),
            self._window_vertex_set,
        )


def infinite_neighbours(T: SpanningTreeWithEnds, v) -> FrozenSet:
    """N^inf_v: tree-neighbours of v whose side of T - v contains an end."""
    return frozenset(T.infinite_neighbours(v))


def finite_subtree(T: SpanningTreeWithEnds, v) -> FrozenSet:
    """T^{fin}_v: v together with all end-free components of T - v."""
    T._require_window_vertex(v)
    seen = {v}
    stack = list(T._finite[v])
    while stack:
        u = stack.pop()
        seen.add(u)
        stack.extend(T._finite[u])
    return frozenset(seen)


def subtree_height(T: SpanningTreeWithEnds, v) -> int:
    T._require_window_vertex(v)
    return T.heights[v]


def finite_root(T: SpanningTreeWithEnds, v):
    """Largest vertex w with v in T^{fin}_w (finite subtrees are nested)."""
    T._require_window_vertex(v)
    reach = T._reaches_end
    while True:
        p = T.parent[v]
        if p is None or is_end(p) or reach[v]:
            return v
        v = p


def trunk_double_ray(T: SpanningTreeWithEnds) -> EdgeSet:
    """Window edges uv with u in N^inf_v and v in N^inf_u; empty for 1-ended trees."""
    reach = T._reaches_end
    edges = []
    for c, p in T.parent.items():
        if p is None or is_end(p) or is_end(c):
            continue
        if reach[c]:
            edges.append((p, c))
    return EdgeSet(frozenset(edges))


class _Picker:
    """Uniform choices backed by blocks of generator output."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._buffer = rng.random(block)
        self._i = 0

    def pick(self, options: Sequence):
        if self._i == self._block:
            self._buffer = self._rng.random(self._block)
            self._i = 0
        x = self._buffer[self._i]
        self._i += 1
        return options[int(x * len(options))]


def _wilson(vertices: Iterable, steps: Mapping[Hashable, Sequence], rooted: Set, rng: np.random.Generator) -> Dict:
    """Loop-erased random walks from each vertex in turn into the growing tree."""
    picker = _Picker(rng)
    in_tree = set(rooted)
    parent = {}
    for start in vertices:
        if start in in_tree:
            continue
        successor = {}
        u = start
        while u not in in_tree:
            nxt = picker.pick(steps[u])
            successor[u] = nxt
            u = nxt
        u = start
        while u not in in_tree:
            in_tree.add(u)
            parent[u] = successor[u]
            u = successor[u]
    return parent


def wilson_wired_ust(window: WindowedGraph, rng: np.random.Generator) -> SpanningTreeWithEnds:
    """
    Uniform spanning tree of the window with the frontier wired to one end.

    A walk at a frontier vertex steps to the end with weight equal to its number
    of ambient neighbours outside the window.
    """
    if not window.frontier:
        raise SamplingError("window has no frontier to wire to an end")
    if not nx.is_connected(window.graph.graph):
        raise SamplingError("wired spanning trees need a connected window")

    steps = {
        v: list(window.neighbours(v)) + [END_1] * window.outside_degree.get(v, 0)
        for v in window.vertices
    }
    parent = _wilson(window.vertices, steps, {END_1}, rng)

    tree = nx.Graph()
    tree.add_node(END_1)
    tree.add_nodes_from(window.vertices)
    tree.add_edges_from(parent.items())
    return SpanningTreeWithEnds(tree, (END_1,), END_1)


def axis_line(window: WindowedGraph, axis: int) -> List[GroupElement]:
    d = window.dimension
    if window.radius is None or not 0 <= axis < d:
        raise SamplingError(f"axis {axis} does not lie in a {d}-dimensional box window")
    zeros = (0,) * len(window.moduli)
    return [
        GroupElement(tuple(t if i == axis else 0 for i in range(d)), zeros, window.moduli)
        for t in range(-window.radius, window.radius + 1)
    ]


def two_ended_tree(window: WindowedGraph, axis: int, rng: np.random.Generator) -> SpanningTreeWithEnds:
    """
    Two-ended tree whose trunk is the coordinate axis through the origin.

    The trunk joins the ends; every other vertex is attached by loop-erased
    walks rooted at the trunk.
    """
    trunk = axis_line(window, axis)
    for a, b in zip(trunk, trunk[1:]):
        if not window.graph.has_edge(a, b):
            raise SamplingError(f"axis {axis} is not a path of the window")
    if not nx.is_connected(window.graph.graph):
        raise SamplingError("two-ended trees need a connected window")

    steps = {v: window.neighbours(v) for v in window.vertices}
    parent = _wilson(window.vertices, steps, set(trunk), rng)

    tree = nx.Graph()
    tree.add_nodes_from([END_1, END_2])
    tree.add_nodes_from(window.vertices)
    tree.add_edges_from(zip(trunk, trunk[1:]))
    tree.add_edge(END_1, trunk[0])
    tree.add_edge(END_2, trunk[-1])
    tree.add_edges_from(parent.items())
    return SpanningTreeWithEnds(tree, (END_1, END_2), END_1)


def rooted_tree(tree, root) -> SpanningTreeWithEnds:
    """Finite rooted tree: no ends, the root stands in for the escape direction."""
    if isinstance(tree, EdgeSet):
        tree = tree.to_graph()
    if not isinstance(tree, nx.Graph):
        raise ConfigurationError(f"expected a tree graph, got {type(tree).__name__}")
    return SpanningTreeWithEnds(nx.Graph(tree), (), root)


def _key(v) -> str:
    if is_end(v):
        return v.name
    return json.dumps(vertex_to_json(v))


def tree_to_json(T: SpanningTreeWithEnds) -> dict:
    return {
        "root": _key(T.root),
        "ends": [e.name for e in T.ends],
        "parents": {_key(v): _key(p) for v, p in T.parent.items() if p is not None},
    }


def tree_from_json(doc: Mapping, dimension: int, moduli: Sequence[int] = ()) -> SpanningTreeWithEnds:
    ends = {f"∂{i}": EndMark(i) for i in (1, 2)}

    def parse(key: str):
        if key in ends:
            return ends[key]
        return element(json.loads(key), dimension, moduli)

    tree = nx.Graph()
    tree.add_node(parse(doc["root"]))
    for child, parent in doc["parents"].items():
        tree.add_edge(parse(child), parse(parent))
    return SpanningTreeWithEnds(tree, tuple(ends[name] for name in doc.get("ends", ())), parse(doc["root"]))
