"""
Spanning double rays in the cube of a graph, built from a spanning tree with
at most two ends and a total order of the neighbours at every vertex.
"""
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import permutations, product
from typing import Callable, Dict, FrozenSet, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigurationError, GraphError
from core.graphs import Edge, EdgeSet, GraphLike, WindowedGraph, as_finite_graph, edge_key, vertex_to_json
from services.tree_sampler import (
    SpanningTreeWithEnds,
    is_end,
    rooted_tree,
    trunk_double_ray,
    two_ended_tree,
    wilson_wired_ust,
)


logger = logging.getLogger(__name__)


class ChildEnumeration(str, Enum):
    """How v^1, v^2, ... walk through the finite children of v."""
    ASCENDING = "ascending"    # v^k is the maximum, so v^k = v-dagger
    DESCENDING = "descending"  # v^1 is the maximum


class RuleTag(str, Enum):
    CHILD = "i"
    SIBLING = "ii"
    TRUNK_BOTH = "iii-a"
    TRUNK_ONE = "iii-b"
    TRUNK_NEITHER = "iii-c"


@dataclass(frozen=True, eq=False)
class OrderAssignment:
    """
    A total order of the graph-neighbours at every vertex, each listed from the
    smallest to the largest. Virtual end-vertices rank above everything.
    """
    orders: Mapping[Hashable, Tuple]

    @cached_property
    def _ranks(self) -> Dict[Hashable, Dict[Hashable, int]]:
        return {v: {u: i for i, u in enumerate(order)} for v, order in self.orders.items()}

    def rank(self, v, u) -> int:
        ranks = self._ranks.get(v)
        if ranks is None:
            raise GraphError(f"no order at vertex {v!r}")
        if is_end(u):
            return len(ranks) + u.index
        try:
            return ranks[u]
        except KeyError:
            raise GraphError(f"{u!r} is not a neighbour of {v!r}") from None

    def maximum(self, v, candidates: Sequence):
        return max(candidates, key=lambda u: self.rank(v, u))

    def sort(self, v, candidates: Sequence) -> List:
        return sorted(candidates, key=lambda u: self.rank(v, u))

    def validate(self, G: GraphLike):
        base = as_finite_graph(G)
        for v in base.vertices:
            if sorted(self.orders.get(v, ())) != base.neighbours(v):
                raise ConfigurationError(f"order at {v!r} is not a permutation of its neighbours")

    def to_json(self) -> Dict[str, list]:
        return {json.dumps(vertex_to_json(v)): [vertex_to_json(u) for u in order] for v, order in self.orders.items()}

    @classmethod
    def from_json(cls, doc: Mapping[str, list], parse: Callable = lambda x: x) -> "OrderAssignment":
        return cls({parse(json.loads(k)): tuple(parse(u) for u in order) for k, order in doc.items()})


def sample_orders(G: GraphLike, rng: np.random.Generator) -> OrderAssignment:
    """Independent uniform permutation of the neighbours at each vertex."""
    base = as_finite_graph(G)
    orders = {}
    for v in base.vertices:
        nbrs = base.neighbours(v)
        orders[v] = tuple(nbrs[i] for i in rng.permutation(len(nbrs)))
    return OrderAssignment(orders)


def child_order_assignments(G: GraphLike, T: SpanningTreeWithEnds) -> Iterator[OrderAssignment]:
    """
    One assignment per relative order of the finite children at every vertex.
    The rules only see the orders through these restrictions.
    """
    base = as_finite_graph(G)
    per_vertex = []
    for v in base.vertices:
        children = T.finite_children(v)
        rest = tuple(u for u in base.neighbours(v) if u not in children)
        per_vertex.append([rest + perm for perm in permutations(children)])
    for choice in product(*per_vertex):
        yield OrderAssignment(dict(zip(base.vertices, choice)))


def ordered_children(
    T: SpanningTreeWithEnds, orders: OrderAssignment, v, enumeration: ChildEnumeration = ChildEnumeration.ASCENDING
) -> List:
    children = orders.sort(v, T.finite_children(v))
    if enumeration is ChildEnumeration.DESCENDING:
        children.reverse()
    return children


def kth_child(
    T: SpanningTreeWithEnds,
    orders: OrderAssignment,
    v,
    i: int,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
):
    children = ordered_children(T, orders, v, enumeration)
    if not 1 <= i <= len(children):
        raise ConfigurationError(f"{v!r} has {len(children)} finite children, asked for child {i}")
    return children[i - 1]


def dagger(T: SpanningTreeWithEnds, orders: OrderAssignment, v):
    children = T.finite_children(v)
    if not children:
        return v
    return orders.maximum(v, children)


@dataclass(frozen=True, eq=False)
class PhiResult:
    edges: EdgeSet
    tags: Mapping[Edge, RuleTag]
    trunk_sources: Mapping[Edge, Edge] = field(default_factory=dict)
    boundary_affected: FrozenSet = frozenset()
    daggers: Mapping[Hashable, Hashable] = field(default_factory=dict)

    def edges_with(self, *tags: RuleTag) -> List[Edge]:
        return sorted(e for e, t in self.tags.items() if t in tags)

    def tags_to_json(self) -> List[list]:
        return [[vertex_to_json(u), vertex_to_json(v), self.tags[(u, v)].value] for u, v in sorted(self.tags)]


def phi_edges(
    T: SpanningTreeWithEnds,
    orders: OrderAssignment,
    G: Optional[GraphLike] = None,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
) -> PhiResult:
    """
    Apply the three connection rules:

    (i)   v joins (v^1)-dagger,
    (ii)  v^i joins (v^{i+1})-dagger for consecutive finite children,
    (iii) each trunk edge {a, b} joins a or a-dagger to b or b-dagger; the
          endpoint on a's side is a itself exactly when b is the largest
          element of N^inf_a.
    """
    if G is not None:
        base = as_finite_graph(G)
        stray = [e for e in T.window_edges().edges if not base.has_edge(*e)]
        if stray:
            raise GraphError(f"tree edge {stray[0]} is not an edge of the graph")

    daggers = {v: dagger(T, orders, v) for v in T.window_vertices}
    tags: Dict[Edge, RuleTag] = {}

    def emit(u, w, tag: RuleTag):
        e = edge_key(u, w)
        if e in tags:
            logger.warning(f"Rule {tag.value} re-emitted edge {e} (first from rule {tags[e].value})")
            return
        tags[e] = tag

    for v in T.window_vertices:
        children = ordered_children(T, orders, v, enumeration)
        if not children:
            continue
        emit(v, daggers[children[0]], RuleTag.CHILD)
        for c, c_next in zip(children, children[1:]):
            emit(c, daggers[c_next], RuleTag.SIBLING)

    def side(a, b):
        top = orders.maximum(a, T.infinite_neighbours(a))
        return (a, True) if top == b else (daggers[a], False)

    trunk_sources: Dict[Edge, Edge] = {}
    for a, b in trunk_double_ray(T):
        x, x_direct = side(a, b)
        y, y_direct = side(b, a)
        tag = {2: RuleTag.TRUNK_BOTH, 1: RuleTag.TRUNK_ONE, 0: RuleTag.TRUNK_NEITHER}[x_direct + y_direct]
        emit(x, y, tag)
        trunk_sources[edge_key(x, y)] = (a, b)

    affected = set()
    for end in T.ends:
        for v in T.attachments(end):
            affected.update((v, daggers[v]))

    edges = EdgeSet(frozenset(tags), frozenset(T.window_vertices))
    return PhiResult(edges, tags, trunk_sources, frozenset(affected), daggers)


def finite_hamilton_cycle(
    G: GraphLike,
    T,
    orders: OrderAssignment,
    root=None,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
) -> EdgeSet:
    """
    Hamilton cycle of G^3: the rules produce a spanning root..root-dagger path
    when the root is treated as the only escape direction; the root-dagger edge
    closes it.
    """
    base = as_finite_graph(G)
    if base.number_of_vertices() < 3:
        raise GraphError(f"a Hamilton cycle needs at least 3 vertices, got {base.number_of_vertices()}")
    if not isinstance(T, SpanningTreeWithEnds):
        if root is None:
            raise ConfigurationError("an unrooted tree needs an explicit root")
        T = rooted_tree(T, root)
    if T.ends:
        raise ConfigurationError("finite Hamilton cycles use rooted trees without ends")
    if set(T.window_vertices) != set(base.vertices):
        raise GraphError("tree does not span the graph")

    phi = phi_edges(T, orders, base, enumeration)
    closing = edge_key(T.root, phi.daggers[T.root])
    return EdgeSet(phi.edges.edges | {closing}, frozenset(base.vertices))



@dataclass(frozen=True, eq=False)
class CubeSample:
    window: WindowedGraph
    tree: SpanningTreeWithEnds
    orders: OrderAssignment
    phi: PhiResult
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING

    @property
    def edges(self) -> EdgeSet:
        return self.phi.edges

    @cached_property
    def trusted(self) -> FrozenSet:
        """Interior vertices whose rules never touch an end."""
        return self.window.interior - self.phi.boundary_affected


def sample_cube(
    window: WindowedGraph,
    ends: int,
    rng: np.random.Generator,
    axis: int = 0,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
) -> CubeSample:
    """Wired tree (one end) or trunk tree along `axis` (two ends), random orders, then phi."""
    if ends == 1:
        tree = wilson_wired_ust(window, rng)
    elif ends == 2:
        tree = two_ended_tree(window, axis, rng)
    else:
        raise ConfigurationError(f"trees have 1 or 2 ends, got {ends}")
    orders = sample_orders(window, rng)
    phi = phi_edges(tree, orders, window, enumeration)
    logger.debug(f"Cube sample: {len(phi.edges)} edges, {len(phi.boundary_affected)} boundary-affected vertices")
    return CubeSample(window, tree, orders, phi, enumeration)
