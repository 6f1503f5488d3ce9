"""
Double rays beyond the plane: the product construction on Z^d and the
matching/coset-path assembly for finitely generated Abelian groups.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import AssemblyError, ConfigurationError, SearchExhaustedError
from core.graphs import (
    Edge,
    EdgeSet,
    FiniteGraph,
    WindowedGraph,
    build_abelian_window,
    build_cayley_finite,
    build_grid_window,
    edge_key,
    translate_edge_set,
)
from core.group import GroupElement, torsion_elements, unit_vectors, zero
from services.tiling import choose_coset, sample_tiling


logger = logging.getLogger(__name__)

QUOTIENT_SIZE_LIMIT = 10_000


@dataclass(frozen=True)
class CoinFlip:
    heads: bool

    @classmethod
    def flip(cls, rng: np.random.Generator) -> "CoinFlip":
        return cls(bool(rng.integers(2)))

    def __str__(self) -> str:
        return "heads" if self.heads else "tails"


@dataclass(frozen=True, eq=False)
class RaySample:
    """
    A double-ray sample on a window, with the vertices whose neighbourhood can
    be trusted. Product rays also carry the plane ray R12 of their last level
    and the spanning copy R12 x Z^(d-2) built from it.
    """
    edges: EdgeSet
    trusted: FrozenSet
    window: WindowedGraph
    provenance: Mapping = field(default_factory=dict)
    r12: Optional[EdgeSet] = None
    spanning_copy: Optional[EdgeSet] = None


@dataclass(frozen=True)
class MatchingPair:
    m1: EdgeSet
    m2: EdgeSet


@dataclass(frozen=True)
class CosetPath:
    vertices: Tuple[GroupElement, ...]
    cosets: Tuple[GroupElement, ...]

    @property
    def endpoint(self) -> GroupElement:
        return self.vertices[-1]

    def edges(self) -> List[Edge]:
        return [edge_key(a, b) for a, b in zip(self.vertices, self.vertices[1:])]


def line_ray(window: WindowedGraph) -> RaySample:
    """The integer line is its own spanning double ray."""
    if window.dimension != 1 or window.moduli:
        raise ConfigurationError("line rays live on one-dimensional windows")
    vertices = window.vertices
    edges = EdgeSet(frozenset(zip(vertices, vertices[1:])), frozenset(vertices))
    return RaySample(edges, window.interior, window, {"construction": "line"})


def tiling_ray(window: WindowedGraph, rng: np.random.Generator) -> RaySample:
    sample = sample_tiling(window, rng)
    provenance = {"construction": "tiling", "colour": "solid", "shift": sample.shift.to_json()}
    return RaySample(sample.solid, sample.trusted, window, provenance)


def _line_map(R12: RaySample, coin: CoinFlip) -> Dict[int, GroupElement]:
    """
    The isomorphism from the integer line onto the visible part of R12 sending
    0 to the origin; the coin picks which neighbour is f(1).

    Both directions advance in lockstep through trusted and untrusted vertices
    alike, each stopping where R12 ends or branches. On a finite cycle closed
    through the window frontier they stop where they meet, so each direction
    gets half of the cycle and f stays injective.
    """
    origin = zero(2)
    if origin not in R12.trusted or R12.edges.degree(origin) != 2:
        raise AssemblyError("origin is not a trusted degree-2 vertex of R12")
    first, second = R12.edges.neighbours(origin)
    forward, backward = (first, second) if coin.heads else (second, first)

    f = {0: origin}
    seen = {origin}
    walkers = {1: (origin, forward), -1: (origin, backward)}
    closed = False
    step = 0
    while walkers:
        step += 1
        targets = {cur for _, cur in walkers.values()}
        if len(walkers) == 2 and len(targets) == 1:
            seen |= targets
            closed = True
            break
        for sign in (1, -1):
            if sign not in walkers:
                continue
            prev, cur = walkers.pop(sign)
            if cur in seen:
                closed = True
                continue
            seen.add(cur)
            f[sign * step] = cur
            onward = [w for w in R12.edges.neighbours(cur) if w != prev]
            if len(onward) == 1:
                walkers[sign] = (cur, onward[0])

    if closed and seen <= R12.trusted:
        raise AssemblyError("R12 closes into a cycle through the origin")
    return f


def product_ray(
    R12: RaySample, inner: RaySample, coin: CoinFlip, window: Optional[WindowedGraph] = None
) -> RaySample:
    """
    Image of the inner ray (on Z0 x Z3 x ...) under f x id, where f runs along R12.
    """
    if R12.window.dimension != 2:
        raise ConfigurationError("R12 must live on a window of Z^2")
    f = _line_map(R12, coin)
    m = inner.window.dimension
    if window is None:
        radius = min(R12.window.radius, inner.window.radius)
        window = build_grid_window(m + 1, radius, min(inner.window.margin, radius - 1))

    def lift(w: GroupElement) -> Optional[GroupElement]:
        image = f.get(w.free[0])
        if image is None:
            return None
        lifted = GroupElement(image.free + w.free[1:])
        return lifted if window.contains(lifted) else None

    edges = []
    dropped = 0
    for u, v in inner.edges.edges:
        fu, fv = lift(u), lift(v)
        if fu is None or fv is None:
            dropped += 1
            continue
        edges.append((fu, fv))

    trusted = []
    for w in inner.trusted:
        a = w.free[0]
        if a - 1 not in f or a + 1 not in f:
            continue
        image = lift(w)
        if image is None or image not in window.interior:
            continue
        if all(lift(n) is not None for n in inner.edges.neighbours(w)):
            trusted.append(image)

    if dropped:
        logger.debug(f"Product map dropped {dropped} edges outside the visible part of R12")
    provenance = {
        "construction": "product",
        "dimension": m + 1,
        "coin": str(coin),
        "line_span": [min(f), max(f)],
        "r12": dict(R12.provenance),
        "inner": dict(inner.provenance),
    }
    edge_set = EdgeSet(frozenset(edges), frozenset(window.vertices), dropped=dropped)
    return RaySample(edge_set, frozenset(trusted), window, provenance, r12=R12.edges)


def product_ray_z3(R12: RaySample, R3: RaySample, coin: CoinFlip, window: Optional[WindowedGraph] = None) -> RaySample:
    if R3.window.dimension != 2:
        raise ConfigurationError("R3 must live on a window of Z^2")
    return product_ray(R12, R3, coin, window)


def spanning_copy(R12: EdgeSet, H: EdgeSet) -> EdgeSet:
    """R12 x H: a spanning copy of Z x (whatever H spans) inside Z^2 x Z^(d-2)."""
    vertices = frozenset(x.extend(h.free) for x in R12.vertices for h in H.vertices)
    edges = [(x.extend(h.free), y.extend(h.free)) for x, y in R12.edges for h in H.vertices]
    edges += [(x.extend(h.free), x.extend(k.free)) for h, k in H.edges for x in R12.vertices]
    return EdgeSet(frozenset(edges), vertices)


@dataclass(frozen=True, eq=False)
class ProductLevel:
    dimension: int
    ray: RaySample
    spanning_copy: Optional[EdgeSet] = None


def level_spanning_copy(r12: EdgeSet, k: int, radius: int) -> EdgeSet:
    """R12 x Z^(k-2) on the level-k box of the given radius."""
    plane = EdgeSet(r12.edges, frozenset(build_grid_window(2, radius, 0).vertices))
    return spanning_copy(plane, build_grid_window(k - 2, radius, 0).graph.edge_set())


def product_levels(
    d: int, rng: np.random.Generator, radius: int, margin: int, spanning_copies: bool = True
) -> List[ProductLevel]:
    """
    Level k holds a double ray of Z^k and the spanning copy R12 x Z^(k-2) of
    Z^(k-1) inside Z^k. Level 2 is a plane tiling ray.
    """
    if d < 3:
        raise ConfigurationError(f"product rays start at dimension 3, got {d}")
    plane = build_grid_window(2, radius, margin)
    ray = tiling_ray(plane, rng)
    levels = [ProductLevel(2, ray)]
    for k in range(3, d + 1):
        r12 = tiling_ray(plane, rng)
        coin = CoinFlip.flip(rng)
        ray = product_ray(r12, ray, coin)
        copy = level_spanning_copy(r12.edges, k, radius) if spanning_copies else None
        levels.append(ProductLevel(k, ray, copy))
        logger.debug(f"Product level {k}: {len(ray.edges)} edges, {len(ray.trusted)} trusted vertices")
    return levels


def product_ray_zd(
    d: int, rng: np.random.Generator, radius: int = 8, margin: int = 2, spanning_copies: bool = True
) -> RaySample:
    """The level-d double ray, carrying the level-d spanning copy of Z^(d-1)."""
    top = product_levels(d, rng, radius, margin, spanning_copies)[-1]
    return replace(top.ray, spanning_copy=top.spanning_copy)


def _walk(adjacency: Mapping, start, first, label: int, labels: Dict[Edge, int]):
    prev, cur = start, first
    while True:
        e = edge_key(prev, cur)
        if e in labels:
            if labels[e] != label:
                raise AssemblyError(f"odd cycle through {e}: the ray cannot split into two matchings")
            return
        labels[e] = label
        onward = [w for w in adjacency[cur] if w != prev]
        if not onward:
            return
        prev, cur, label = cur, onward[0], 1 - label


def matching_split(
    R: EdgeSet, coin: CoinFlip, trusted: Optional[FrozenSet] = None, anchor: Optional[GroupElement] = None
) -> MatchingPair:
    """
    Alternate the edges along every component of the ray. The component through
    `anchor` (the origin by default) is labelled outwards from it, the others
    from their smallest vertex; the coin decides which class becomes M1.
    """
    adjacency = R.adjacency
    for v, nbrs in adjacency.items():
        if len(nbrs) > 2:
            raise AssemblyError(f"vertex {v} has degree {len(nbrs)} in the ray")
    for v in trusted or ():
        if len(adjacency.get(v, ())) != 2:
            raise AssemblyError(f"trusted vertex {v} has degree {len(adjacency.get(v, ()))} in the ray")

    labels: Dict[Edge, int] = {}
    starts = sorted(v for v, nbrs in adjacency.items() if nbrs)
    if anchor is None and starts:
        anchor = zero(starts[0].dimension, starts[0].moduli)
    if anchor in adjacency and adjacency[anchor]:
        starts.insert(0, anchor)

    for start in starts:
        nbrs = adjacency[start]
        if any(edge_key(start, w) in labels for w in nbrs):
            continue
        for label, first in enumerate(nbrs):
            _walk(adjacency, start, first, label, labels)

    classes = (
        frozenset(e for e, k in labels.items() if k == 0),
        frozenset(e for e, k in labels.items() if k == 1),
    )
    first, second = classes if coin.heads else classes[::-1]
    return MatchingPair(EdgeSet(first, R.vertices), EdgeSet(second, R.vertices))


def quotient_graph(moduli: Sequence[int]) -> FiniteGraph:
    """Cayley graph of the torsion part with the images of the standard generators."""
    return build_cayley_finite(moduli, unit_vectors(0, moduli))


def quotient_hamilton_path(Q: FiniteGraph) -> List[GroupElement]:
    """Backtracking search for a Hamilton path starting at the identity coset."""
    n = Q.number_of_vertices()
    if n > QUOTIENT_SIZE_LIMIT:
        raise SearchExhaustedError(f"quotient of size {n} exceeds the search limit {QUOTIENT_SIZE_LIMIT}")
    start = zero(Q.dimension, Q.moduli)
    if not Q.has_vertex(start):
        raise AssemblyError("quotient graph has no identity vertex")
    if n == 1:
        return [start]

    path = [start]
    on_path = {start}
    stack = [iter(Q.neighbours(start))]
    while stack:
        for w in stack[-1]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                if len(path) == n:
                    return path
                stack.append(iter(Q.neighbours(w)))
                break
        else:
            stack.pop()
            on_path.discard(path.pop())
    raise SearchExhaustedError(f"no Hamilton path in the quotient of size {n}")


def lift_coset_path(
    path: Sequence[GroupElement], rank: int, moduli: Sequence[int], generators: Optional[Sequence[GroupElement]] = None
) -> CosetPath:
    """
    Lift each quotient step to the G-edge of a generator with the same image,
    preferring generators that stay out of the free part.
    """
    moduli = tuple(moduli)
    gens = list(generators) if generators else unit_vectors(rank, moduli)
    steps = sorted({s for g in gens for s in (g, -g) if any(s.torsion)}, key=lambda s: (any(s.free), s))
    if not path or any(path[0].torsion):
        raise AssemblyError("coset paths start at the identity coset")

    vertices = [zero(rank, moduli)]
    for q, q_next in zip(path, path[1:]):
        diff = q_next - q
        s = next((s for s in steps if s.torsion == diff.torsion), None)
        if s is None:
            raise AssemblyError(f"quotient step {q} -> {q_next} has no generator above it")
        vertices.append(vertices[-1] + s)
    cosets = tuple(GroupElement((), v.torsion, moduli) for v in vertices)
    if len(set(cosets)) != len(cosets):
        raise AssemblyError("lifted path revisits a coset")
    return CosetPath(tuple(vertices), cosets)


def embed(g: GroupElement, moduli: Sequence[int]) -> GroupElement:
    moduli = tuple(moduli)
    return GroupElement(g.free, (0,) * len(moduli), moduli)


def assemble_abelian(M: MatchingPair, P: CosetPath, window: WindowedGraph, source_vertices=None) -> EdgeSet:
    """
    M1, the p-translate of M2 and every translate P + gamma, gamma in the free part.
    """
    moduli = window.moduli
    p = P.endpoint
    if source_vertices is None:
        source_vertices = M.m1.vertices | M.m2.vertices

    edges = set()
    dropped = 0

    def add(u, v):
        nonlocal dropped
        if window.contains(u) and window.contains(v):
            edges.add(edge_key(u, v))
        else:
            dropped += 1

    for u, v in M.m1.edges:
        add(embed(u, moduli), embed(v, moduli))
    for u, v in M.m2.edges:
        add(embed(u, moduli) + p, embed(v, moduli) + p)
    for gamma in source_vertices:
        shift = embed(gamma, moduli)
        for a, b in zip(P.vertices, P.vertices[1:]):
            add(a + shift, b + shift)

    result = EdgeSet(frozenset(edges), frozenset(window.vertices), dropped=dropped)
    for v, nbrs in result.adjacency.items():
        if len(nbrs) > 2:
            raise AssemblyError(f"assembly gives {v} degree {len(nbrs)}: inputs are inconsistent")
    return result


@dataclass(frozen=True, eq=False)
class AbelianSample:
    window: WindowedGraph
    source: RaySample
    matching: MatchingPair
    path: CosetPath
    assembled: EdgeSet
    edges: EdgeSet
    trusted: FrozenSet
    shift: GroupElement
    provenance: Mapping = field(default_factory=dict)

    def contraction_map(self) -> Dict[GroupElement, GroupElement]:
        """Send every window vertex to the free-part vertex whose P-translate holds it."""
        by_coset = {v.torsion: v for v in self.path.vertices}
        result = {}
        for w in self.window.vertices:
            u = w - self.shift
            gamma = u - by_coset[u.torsion]
            result[w] = GroupElement(gamma.free)
        return result

    def translates(self) -> Dict[GroupElement, List[GroupElement]]:
        """Vertices of P + gamma inside the window, keyed by gamma."""
        groups: Dict[GroupElement, List[GroupElement]] = {}
        for w, gamma in self.contraction_map().items():
            groups.setdefault(gamma, []).append(w)
        return groups


def source_ray(rank: int, radius: int, margin: int, rng: np.random.Generator) -> RaySample:
    if rank == 1:
        return line_ray(build_grid_window(1, radius, margin))
    if rank == 2:
        return tiling_ray(build_grid_window(2, radius, margin), rng)
    return product_ray_zd(rank, rng, radius, margin, spanning_copies=False)


def sample_abelian(
    rank: int, moduli: Sequence[int], radius: int, margin: int, rng: np.random.Generator
) -> AbelianSample:
    moduli = tuple(moduli)
    window = build_abelian_window(rank, moduli, radius, margin)
    ray = source_ray(rank, radius, margin, rng)
    coin = CoinFlip.flip(rng)
    matching = matching_split(ray.edges, coin, ray.trusted)

    if moduli:
        quotient_path = quotient_hamilton_path(quotient_graph(moduli))
    else:
        quotient_path = [zero(0)]
    P = lift_coset_path(quotient_path, rank, moduli)
    assembled = assemble_abelian(matching, P, window, ray.edges.vertices)

    def whole(gamma) -> bool:
        shift = embed(gamma, moduli)
        return all(window.contains(a + shift) for a in P.vertices)

    trusted_gammas = [
        gamma for gamma in ray.trusted
        if whole(gamma) and all(whole(n) for n in ray.edges.neighbours(gamma))
    ]
    trusted = {a + embed(gamma, moduli) for gamma in trusted_gammas for a in P.vertices}

    shift = zero(rank, moduli)
    if moduli:
        shift = choose_coset(rng, list(torsion_elements(moduli, rank)))
    edges = translate_edge_set(assembled, shift, window)
    trusted = frozenset(v + shift for v in trusted)

    provenance = {
        "construction": "abelian",
        "rank": rank,
        "moduli": list(moduli),
        "coin": str(coin),
        "path": [v.to_json() for v in P.vertices],
        "shift": shift.to_json(),
        "source": dict(ray.provenance),
    }
    logger.debug(f"Abelian sample Z^{rank} x {moduli}: {len(edges)} edges, {len(trusted)} trusted")
    return AbelianSample(window, ray, matching, P, assembled, edges, trusted, shift, provenance)
