"""
Edge tiling of the square lattice and the colour-swap construction of two
spanning double rays.

Tiles sit at the points of the index-8 sublattice generated by (2, 2) and
(2, -2). Every tile carries a solid 8-cycle and a dotted 8-cycle; adjacent
tiles share two attachment vertices, and swapping colours on the unit square
through them joins the two tiles' cycles.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.exceptions import TilingError
from core.graphs import EdgeSet, Edge, FiniteGraph, WindowedGraph, edge_key, translate_edge_set
from core.group import GroupElement, lattice
from services.tree_sampler import SpanningTreeWithEnds, wilson_wired_ust


logger = logging.getLogger(__name__)

# Corner walks of the two template cycles, in drawing order.
SOLID_OUTLINE = [(-1, 0), (0, 0), (0, 1), (0, 2), (0, 3), (-1, 3), (-1, 2), (-1, 1)]
DOTTED_OUTLINE = [(-2, 1), (-1, 1), (0, 1), (1, 1), (1, 2), (0, 2), (-1, 2), (-2, 2)]

TILE_STEPS = (lattice(2, 2), lattice(-2, -2), lattice(2, -2), lattice(-2, 2))


class Colour(str, Enum):
    SOLID = "solid"
    DOTTED = "dotted"

    def other(self) -> "Colour":
        return Colour.DOTTED if self is Colour.SOLID else Colour.SOLID


def _cycle(outline: Sequence[Tuple[int, int]]) -> FrozenSet[Edge]:
    points = [lattice(*p) for p in outline]
    return frozenset(edge_key(a, b) for a, b in zip(points, points[1:] + points[:1]))


def in_tile_lattice(g: GroupElement) -> bool:
    x, y = g.free
    return x % 2 == 0 and y % 2 == 0 and (x // 2 + y // 2) % 2 == 0


def coset_key(g: GroupElement) -> Tuple[int, int, int]:
    x, y = g.free
    return x % 2, y % 2, (x // 2 + y // 2) % 2


@lru_cache(maxsize=1)
def coset_representatives() -> Tuple[GroupElement, ...]:
    """First element of each coset met in a lexicographic scan of [0, 4)^2."""
    seen = {}
    for x in range(4):
        for y in range(4):
            g = lattice(x, y)
            seen.setdefault(coset_key(g), g)
    reps = tuple(seen.values())
    if len(reps) != 8:
        raise TilingError(f"expected 8 cosets of the tile lattice, found {len(reps)}")
    return reps


def tile_template() -> Tuple[EdgeSet, EdgeSet]:
    solid, dotted = _cycle(SOLID_OUTLINE), _cycle(DOTTED_OUTLINE)
    if solid & dotted:
        raise TilingError("template colour classes overlap")
    return EdgeSet(solid), EdgeSet(dotted)


@dataclass(frozen=True)
class Tile:
    base: GroupElement
    solid: EdgeSet
    dotted: EdgeSet

    def __post_init__(self):
        if not in_tile_lattice(self.base):
            raise TilingError(f"{self.base} is not a tile base")
        if len(self.solid) != 8 or len(self.dotted) != 8 or self.solid.edges & self.dotted.edges:
            raise TilingError(f"tile at {self.base} does not split into two 8-edge classes")

    @classmethod
    def at(cls, base: GroupElement) -> "Tile":
        return _tile_at(base)

    @cached_property
    def edges(self) -> FrozenSet[Edge]:
        return self.solid.edges | self.dotted.edges

    @cached_property
    def vertices(self) -> FrozenSet[GroupElement]:
        return self.solid.vertices | self.dotted.vertices

    def colour_of(self, u, v) -> Colour:
        e = edge_key(u, v)
        if e in self.solid.edges:
            return Colour.SOLID
        if e in self.dotted.edges:
            return Colour.DOTTED
        raise TilingError(f"edge {e} is not in the tile at {self.base}")

    def neighbour_bases(self) -> List[GroupElement]:
        return [self.base + step for step in TILE_STEPS]


@lru_cache(maxsize=8192)
def _tile_at(base: GroupElement) -> Tile:
    solid, dotted = tile_template()
    return Tile(base, translate_edge_set(solid, base), translate_edge_set(dotted, base))


@dataclass(frozen=True)
class AttachmentSquare:
    tiles: Tuple[GroupElement, GroupElement]
    vertices: Tuple[GroupElement, GroupElement]
    edges: EdgeSet


@lru_cache(maxsize=16384)
def _attachment(a: GroupElement, b: GroupElement) -> AttachmentSquare:
    if b - a not in TILE_STEPS:
        raise TilingError(f"tiles at {a} and {b} are not adjacent")
    shared = sorted(Tile.at(a).vertices & Tile.at(b).vertices)
    if len(shared) != 2:
        raise TilingError(f"tiles at {a} and {b} share {len(shared)} vertices, expected 2")
    p, q = shared
    (px, py), (qx, qy) = p.free, q.free
    if abs(px - qx) != 1 or abs(py - qy) != 1:
        raise TilingError(f"attachment vertices {p}, {q} are not opposite corners of a unit square")
    x0, y0 = min(px, qx), min(py, qy)
    c00, c10, c11, c01 = lattice(x0, y0), lattice(x0 + 1, y0), lattice(x0 + 1, y0 + 1), lattice(x0, y0 + 1)
    square = EdgeSet(frozenset([(c00, c10), (c10, c11), (c11, c01), (c01, c00)]))
    return AttachmentSquare((a, b), (p, q), square)


def attachment(t: Tile, t_prime: Tile) -> AttachmentSquare:
    a, b = sorted((t.base, t_prime.base))
    return _attachment(a, b)


def attachment_squares(t: Tile) -> List[AttachmentSquare]:
    return [attachment(t, Tile.at(b)) for b in t.neighbour_bases()]


def internal_edges(t: Tile) -> Dict[Colour, EdgeSet]:
    """Edges of the tile lying in none of its four attachment squares."""
    covered = set()
    for square in attachment_squares(t):
        covered |= square.edges.edges
    return {
        Colour.SOLID: EdgeSet(t.solid.edges - covered),
        Colour.DOTTED: EdgeSet(t.dotted.edges - covered),
    }


def tile_base_of(u: GroupElement, v: GroupElement) -> GroupElement:
    """Base of the unique tile containing the lattice edge uv."""
    e = edge_key(u, v)
    solid, dotted = tile_template()
    for a, b in solid.edges | dotted.edges:
        shift = e[0] - a
        if e[1] - b == shift and in_tile_lattice(shift):
            return shift
    raise TilingError(f"{e} is not a unit edge of the lattice")


def controlling_tile_edge(u: GroupElement, v: GroupElement) -> Optional[Tuple[GroupElement, GroupElement]]:
    """
    Tile-graph edge whose attachment square contains uv, or None for internal edges.

    After swapping, uv has its template colour exactly when that tile-graph edge
    is not in the tree.
    """
    t = Tile.at(tile_base_of(u, v))
    for square in attachment_squares(t):
        if (u, v) in square.edges:
            return square.tiles
    return None


def _box_radius(window: WindowedGraph) -> int:
    if window.dimension != 2 or window.moduli or window.radius is None:
        raise TilingError("tilings live on square boxes of Z^2")
    return window.radius


def tile_fits(base: GroupElement, radius: int) -> bool:
    x, y = base.free
    return -radius <= x - 2 and x + 1 <= radius and -radius <= y and y + 3 <= radius


def tiles_in_window(window: WindowedGraph) -> List[Tile]:
    radius = _box_radius(window)
    tiles = [
        Tile.at(lattice(x, y))
        for x in range(-radius + 2, radius)
        for y in range(-radius, radius - 2)
        if in_tile_lattice(lattice(x, y))
    ]
    return [t for t in tiles if tile_fits(t.base, radius)]


def tile_graph_window(window: WindowedGraph) -> WindowedGraph:
    """
    Window of the tile graph Cay(tile lattice, {(+-2, +-2)}) on the tiles that fit.

    Tiles with a neighbour that does not fit form the frontier.
    """
    radius = _box_radius(window)
    bases = [t.base for t in tiles_in_window(window)]
    if not bases:
        raise TilingError(f"no whole tile fits in a box of radius {radius}")
    present = set(bases)
    g = nx.Graph()
    g.add_nodes_from(bases)
    outside = {}
    for b in bases:
        missing = 0
        for step in TILE_STEPS:
            c = b + step
            if c in present:
                g.add_edge(b, c, generator=step)
            else:
                missing += 1
        if missing:
            outside[b] = missing
    return WindowedGraph(FiniteGraph(g, 2), frozenset(outside), 0, None, outside)


@dataclass(frozen=True)
class TwoColouring:
    colours: Mapping[Edge, Colour]

    def colour(self, u, v) -> Colour:
        try:
            return self.colours[edge_key(u, v)]
        except KeyError:
            raise TilingError(f"edge {edge_key(u, v)} is not coloured") from None

    def class_edges(self, colour: Colour) -> FrozenSet[Edge]:
        return frozenset(e for e, c in self.colours.items() if c is colour)

    def classes(self, vertices: Optional[Iterable] = None) -> Tuple[EdgeSet, EdgeSet]:
        carrier = None if vertices is None else frozenset(vertices)
        return (
            EdgeSet(self.class_edges(Colour.SOLID), carrier),
            EdgeSet(self.class_edges(Colour.DOTTED), carrier),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, TwoColouring) and dict(self.colours) == dict(other.colours)

    def __hash__(self) -> int:
        return hash(frozenset(self.colours.items()))


def base_colouring(tiles: Iterable[Tile]) -> TwoColouring:
    colours: Dict[Edge, Colour] = {}
    for t in tiles:
        for colour, part in ((Colour.SOLID, t.solid), (Colour.DOTTED, t.dotted)):
            for e in part.edges:
                if e in colours:
                    raise TilingError(f"edge {e} lies in two tiles")
                colours[e] = colour
    return TwoColouring(colours)


def swap_at_squares(c: TwoColouring, squares: Iterable[AttachmentSquare]) -> TwoColouring:
    colours = dict(c.colours)
    touched = set()
    for square in squares:
        for e in square.edges.edges:
            if e in touched:
                raise TilingError(f"attachment squares overlap in edge {e}")
            if e not in colours:
                raise TilingError(f"attachment square edge {e} is not coloured")
            touched.add(e)
            colours[e] = colours[e].other()
    return TwoColouring(colours)


def tiling_colouring(tile_tree: SpanningTreeWithEnds, window: WindowedGraph) -> TwoColouring:
    tiles = tiles_in_window(window)
    bases = {t.base for t in tiles}
    if set(tile_tree.window_vertices) != bases:
        raise TilingError("tile tree does not span the tiles of the window")
    squares = [_attachment(*e) for e in sorted(tile_tree.window_edges().edges)]
    return swap_at_squares(base_colouring(tiles), squares)


def tiling_double_rays(tile_tree: SpanningTreeWithEnds, window: WindowedGraph) -> Tuple[EdgeSet, EdgeSet]:
    """Solid and dotted classes after swapping at every tree edge's attachment square."""
    return tiling_colouring(tile_tree, window).classes(window.vertices)


def tiling_trusted(window: WindowedGraph, tile_window: WindowedGraph, colouring: TwoColouring) -> FrozenSet:
    """
    Interior vertices whose four lattice edges are all tiled and which lie on no
    frontier tile. Every finite colour cycle runs through a frontier tile, so
    these are the vertices whose neighbourhood matches the infinite picture.
    """
    fringe = set()
    for b in tile_window.frontier:
        fringe |= Tile.at(b).vertices
    trusted = []
    for v in window.interior:
        if v in fringe:
            continue
        x, y = v.free
        around = (lattice(x + 1, y), lattice(x - 1, y), lattice(x, y + 1), lattice(x, y - 1))
        if all(edge_key(v, w) in colouring.colours for w in around):
            trusted.append(v)
    return frozenset(trusted)


def choose_coset(rng: np.random.Generator, representatives: Sequence[GroupElement] = None) -> GroupElement:
    reps = coset_representatives() if representatives is None else representatives
    return reps[int(rng.integers(len(reps)))]


def shift_sample(
    sample: Sequence[EdgeSet], shift: GroupElement, window: Optional[WindowedGraph] = None
) -> Tuple[EdgeSet, ...]:
    shifted = tuple(translate_edge_set(E, shift, window) for E in sample)
    lost = sum(E.dropped for E in shifted)
    if lost:
        logger.debug(f"Coset shift {shift} pushed {lost} edges out of the window")
    return shifted


def randomize_coset(
    sample: Sequence[EdgeSet],
    rng: np.random.Generator,
    representatives: Sequence[GroupElement] = None,
    window: Optional[WindowedGraph] = None,
) -> Tuple[EdgeSet, ...]:
    """Translate every part of the sample by one uniformly chosen coset representative."""
    return shift_sample(sample, choose_coset(rng, representatives), window)


def shift_trusted(trusted: Iterable, shift: GroupElement, window: WindowedGraph) -> FrozenSet:
    moved = []
    for v in trusted:
        w = v + shift
        x, y = w.free
        around = (w, lattice(x + 1, y), lattice(x - 1, y), lattice(x, y + 1), lattice(x, y - 1))
        if all(window.contains(p) for p in around):
            moved.append(w)
    return frozenset(moved)


@dataclass(frozen=True, eq=False)
class TilingSample:
    window: WindowedGraph
    tile_window: WindowedGraph
    tile_tree: SpanningTreeWithEnds
    colouring: TwoColouring
    solid: EdgeSet
    dotted: EdgeSet
    trusted: FrozenSet
    shift: GroupElement

    @property
    def classes(self) -> Dict[Colour, EdgeSet]:
        return {Colour.SOLID: self.solid, Colour.DOTTED: self.dotted}


def sample_tiling(window: WindowedGraph, rng: np.random.Generator, averaged: bool = True) -> TilingSample:
    """
    One draw of the pair of double rays. `averaged=False` keeps the raw law,
    which is only invariant under the tile lattice.
    """
    tile_window = tile_graph_window(window)
    tree = wilson_wired_ust(tile_window, rng)
    colouring = tiling_colouring(tree, window)
    solid, dotted = colouring.classes(window.vertices)
    trusted = tiling_trusted(window, tile_window, colouring)

    shift = lattice(0, 0)
    if averaged:
        shift = choose_coset(rng)
        solid, dotted = shift_sample((solid, dotted), shift, window)
        trusted = shift_trusted(trusted, shift, window)

    logger.debug(f"Tiling sample: {len(tile_window.vertices)} tiles, shift {shift}, {len(trusted)} trusted vertices")
    return TilingSample(window, tile_window, tree, colouring, solid, dotted, trusted, shift)
